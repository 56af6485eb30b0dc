"""Fixed-column PDB reading and writing (ATOM/HETATM only, first MODEL)."""
from __future__ import annotations

import numpy as np

from .atoms import AtomicModel, ModelError

_TWO_LETTER = {"CL", "BR", "FE", "ZN", "MG", "MN", "CA", "NA", "CU", "CO", "NI", "SE", "CD", "HG", "LI"}


def _element_from_name(raw_name: str) -> str:
    # columns 13-14 hold the right-justified element for standard names
    lead = raw_name[:2].strip()
    if raw_name[:1].isalpha() and lead.upper() in _TWO_LETTER:
        return lead.upper()
    letters = "".join(ch for ch in raw_name if ch.isalpha())
    if not letters:
        raise ModelError(f"cannot infer element from atom name {raw_name!r}")
    return letters[0].upper()


def parse_pdb(text: str, source: str = "") -> AtomicModel:
    """Parse ATOM and HETATM records into an :class:`AtomicModel`.

    Alternate locations other than blank/'A' are dropped. Parsing stops at the
    first ENDMDL.
    """
    coords, elements, names, res_names, res_seq, chains, hetero = [], [], [], [], [], [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        rec = line[:6]
        if rec.startswith("ENDMDL"):
            break
        if rec not in ("ATOM  ", "HETATM"):
            continue
        if line[16:17] not in (" ", "A", ""):
            continue
        try:
            xyz = [float(line[30:38]), float(line[38:46]), float(line[46:54])]
            seq = int(line[22:26])
        except ValueError as exc:
            raise ModelError(f"line {lineno}: malformed coordinate or residue columns") from exc
        raw_name = line[12:16]
        element = line[76:78].strip() if len(line) >= 78 else ""
        coords.append(xyz)
        names.append(raw_name.strip())
        elements.append(element.upper() if element else _element_from_name(raw_name))
        res_names.append(line[17:20].strip())
        res_seq.append(seq)
        chains.append(line[21:22].strip() or "_")
        hetero.append(rec == "HETATM")
    if not coords:
        raise ModelError("no ATOM/HETATM records found")
    return AtomicModel(np.array(coords), elements, names, res_names, res_seq, chains, source, hetero)


def format_pdb(m: AtomicModel) -> str:
    lines = []
    for i in range(len(m)):
        name = m.names[i]
        # 4-character names start in column 13, shorter ones in column 14
        padded = name.ljust(4) if len(name) == 4 or len(m.elements[i]) == 2 else (" " + name).ljust(4)
        x, y, z = m.coords[i]
        rec = "HETATM" if m.hetero[i] else "ATOM  "
        chain = "" if m.chains[i] == "_" else m.chains[i]
        lines.append(
            f"{rec}{(i + 1) % 100000:5d} {padded} {m.res_names[i]:>3s} {chain:1s}{m.res_seq[i]:4d}    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}{1.0:6.2f}{0.0:6.2f}          {m.elements[i]:>2s}"
        )
    lines.append("END")
    return "\n".join(lines) + "\n"
