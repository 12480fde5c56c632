from enum import Enum


class GenusName(Enum):
    """
    Generating functions that the ``genus`` command can print.

    Attributes:
        td (str): Todd genus x/(1-e^{-x}).
        td_inv (str): Inverse Todd genus (1-e^{-x})/x.
        e (str): Rank-2 E-genus of a bundle with vanishing first Chern class, in powers of c2.
    """
    td = "td"
    td_inv = "td-inv"
    e = "e"


class VerifyMode(Enum):
    """
    Numerical verification paths.

    Attributes:
        monomial (str): Model fiber integral over (P^1)^n for a monomial.
        gauss_norm (str): Integral of log||dpi||^2 against (dd^c log||dpi||^2)^n on the Milnor fiber.
        psi (str): Integral of log|F - t|^2 against a compactly supported bump.
    """
    monomial = "monomial"
    gauss_norm = "gauss-norm"
    psi = "psi"


class MilnorMethod(Enum):
    """
    How a Milnor number was obtained.
    """
    quotient_dimension = "quotient-dimension"
    quasi_homogeneous = "quasi-homogeneous"


class _Infinite(Enum):
    INFINITE = "infinite"

    def __repr__(self) -> str:
        return "INFINITE"


# Milnor number of a non-isolated critical point
INFINITE = _Infinite.INFINITE
