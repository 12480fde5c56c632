from quillen_singularity.samplers.gauss_norm import GaussNorm
from quillen_singularity.samplers.monomial import Monomial
from quillen_singularity.samplers.protocols import Sampler
from quillen_singularity.samplers.psi import Psi

__all__ = ["GaussNorm", "Monomial", "Psi", "Sampler"]
