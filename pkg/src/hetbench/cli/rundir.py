"""Run directory: every artifact is written atomically and listed, with its
size and SHA-256, in ``manifest.tsv``."""
from __future__ import annotations

import hashlib
import os

from ..grid import atomic_write_bytes, write_mrc

MANIFEST = "manifest.tsv"


class RunDir:
    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self._entries: dict[str, bytes] = {}

    def path(self, name: str) -> str:
        return os.path.join(self.root, name)

    def write_bytes(self, name: str, payload: bytes) -> str:
        if name == MANIFEST:
            raise ValueError(f"{MANIFEST} is reserved")
        p = self.path(name)
        os.makedirs(os.path.dirname(p), exist_ok=True)
        atomic_write_bytes(p, payload)
        self._entries[name] = hashlib.sha256(payload).digest() + len(payload).to_bytes(8, "little")
        return p

    def write_text(self, name: str, text: str) -> str:
        return self.write_bytes(name, text.encode("utf-8"))

    def write_mrc(self, name: str, v) -> str:
        return self.write_bytes(name, write_mrc(v))

    @property
    def artifacts(self) -> list[str]:
        return sorted(self._entries)

    def manifest_text(self) -> str:
        rows = ["path\tbytes\tsha256"]
        for name in self.artifacts:
            e = self._entries[name]
            rows.append(f"{name}\t{int.from_bytes(e[32:], 'little')}\t{e[:32].hex()}")
        return "\n".join(rows) + "\n"

    def finish(self) -> str:
        p = self.path(MANIFEST)
        atomic_write_bytes(p, self.manifest_text().encode("utf-8"))
        return p


def read_manifest(text: str) -> dict[str, tuple[int, str]]:
    out = {}
    for line in text.splitlines()[1:]:
        if line.strip():
            name, size, digest = line.split("\t")
            out[name] = (int(size), digest)
    return out
