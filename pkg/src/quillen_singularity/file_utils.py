import json
import os
import warnings
from typing import Any, Iterable, List, Mapping, Tuple

import petl as etl
from petl.util.base import DictsView

from quillen_singularity.errors import ParseError
from quillen_singularity.fiber_integrals import IntegralSample

SAMPLE_HEADER = ("t_re", "t_im", "value", "est_error")


def read_csv_table(filepath: str, delimiter: str = ",") -> DictsView:
    """
    Reads a CSV file as a view of dictionaries keyed by the header.

    Args:
        filepath (str): Path to the CSV file.
        delimiter (str): Character that separates values in the CSV file. Default is ','.

    Returns:
        DictsView: The rows of the table.
    """
    return etl.dicts(etl.fromcsv(filepath, delimiter=delimiter))


def read_xlsx_table(filepath: str, sheet_name: int = 0) -> DictsView:
    """
    Reads an Excel (.xlsx) sheet as a view of dictionaries keyed by the header.

    Args:
        filepath (str): Path to the Excel file.
        sheet_name (int): Name or index of the sheet to read. Default is the first sheet (0).

    Returns:
        DictsView: The rows of the table.
    """
    return etl.dicts(etl.fromxlsx(filepath, sheet=sheet_name))


def read_table_header(filepath: str) -> Tuple[str, ...]:
    """
    Reads the header of a csv or xlsx table.

    Args:
        filepath (str): The path to the table.

    Returns:
        Tuple[str, ...]: The column headers.
    """
    if _extension(filepath) == ".xlsx":
        table = etl.fromxlsx(filepath)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=UserWarning)  # Catch warning about default stylesheet not being defined
            return tuple(table.header())
    return tuple(etl.fromcsv(filepath).header())


def _extension(filepath: str) -> str:
    extension = os.path.splitext(filepath)[1].lower()
    if extension not in (".csv", ".xlsx"):
        raise ParseError(f"Sample tables must be .csv or .xlsx, got '{filepath}'.")
    return extension


def read_sample_table(filepath: str) -> List[IntegralSample]:
    """
    Reads samples from a table with columns t_re, t_im, value, est_error.

    Args:
        filepath (str): Path to a .csv or .xlsx file.

    Returns:
        List[IntegralSample]: The samples in file order.

    Raises:
        ParseError: If the extension, the header or a cell is not valid.
    """
    header = read_table_header(filepath)
    missing = [key for key in SAMPLE_HEADER if key not in header]
    if missing:
        raise ParseError(f"Sample table '{filepath}' lacks the columns {missing}.")

    rows = read_xlsx_table(filepath) if _extension(filepath) == ".xlsx" else read_csv_table(filepath)
    samples = []
    for lineno, row in enumerate(rows, start=2):
        try:
            samples.append(IntegralSample(
                t=complex(float(row["t_re"]), float(row["t_im"])),
                value=float(row["value"]),
                est_error=float(row["est_error"] or 0.0),
            ))
        except (TypeError, ValueError) as e:
            raise ParseError(f"{filepath}:{lineno}: {e}")
    return samples


def write_sample_table(samples: Iterable[IntegralSample], filepath: str) -> None:
    """
    Writes samples to a .csv or .xlsx table with columns t_re, t_im, value, est_error.

    Float cells are written with repr so that a csv round trip is exact.
    """
    extension = _extension(filepath)
    rows = [SAMPLE_HEADER]
    for s in samples:
        rows.append((float(s.t.real), float(s.t.imag), float(s.value), float(s.est_error)))
    if extension == ".xlsx":
        etl.toxlsx(rows, filepath)
    else:
        etl.tocsv(etl.convertall(rows, repr), filepath)


def load_json(filepath: str) -> Any:
    """
    Raises:
        ParseError: If the file is not valid JSON.
    """
    with open(filepath, encoding="utf-8") as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as e:
            raise ParseError(f"{filepath} is not valid JSON: {e}")


def dump_json(document: Mapping[str, Any]) -> str:
    """Serialises a document with sorted keys, so equal documents give equal text."""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
