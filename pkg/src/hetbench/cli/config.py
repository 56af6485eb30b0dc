"""Plain-text ``key = value`` run configuration with a schema per subcommand.

A config file holds one setting per line; ``#`` starts a comment and blank
lines are ignored. Keys of the form ``prefix.NAME`` are allowed when the
schema declares the prefix as a family (for example ``candidates.cryodrgn``).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Callable


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _list(conv: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(s: str) -> tuple:
        parts = [p.strip() for p in s.split(",") if p.strip()]
        return tuple(conv(p) for p in parts)
    return parse


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


PARSERS = {
    "int": int,
    "float": float,
    "str": str,
    "path": str,
    "bool": _bool,
    "ints": _list(int),
    "floats": _list(float),
    "strs": _list(str),
}


@dataclass(frozen=True)
class Field:
    name: str
    kind: str
    default: Any = None
    help: str = ""
    required: bool = False
    choices: tuple = ()
    must_exist: bool = False  # input path checked at validation time

    def parse(self, raw: str):
        raw = raw.strip()
        if raw == "" and not self.required:
            return None
        try:
            value = PARSERS[self.kind](raw)
        except ValueError as e:
            raise ConfigError(f"{self.name}: {e}") from None
        if self.choices and value not in self.choices:
            raise ConfigError(f"{self.name}: {value!r} is not one of {', '.join(map(str, self.choices))}")
        return value


@dataclass(frozen=True)
class Schema:
    command: str
    fields: tuple[Field, ...]
    families: tuple[Field, ...] = ()  # ``name`` is the prefix; keys look like prefix.NAME
    stochastic: bool = False

    def field(self, key: str) -> Field:
        for f in self.fields:
            if f.name == key:
                return f
        prefix, dot, rest = key.partition(".")
        if dot and rest:
            for f in self.families:
                if f.name == prefix:
                    return Field(key, f.kind, None, f.help, False, f.choices, f.must_exist)
        known = ", ".join([f.name for f in self.fields] + [f"{f.name}.NAME" for f in self.families])
        raise ConfigError(f"unknown key {key!r} for {self.command}; known keys: {known}")


@dataclass
class RunConfig:
    schema: Schema
    values: dict[str, Any] = field(default_factory=dict)
    base_dir: str = "."

    def __getitem__(self, key: str):
        return self.values[key]

    def get(self, key: str, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def family(self, prefix: str) -> dict[str, Any]:
        """``{NAME: value}`` for every ``prefix.NAME`` key, sorted by NAME."""
        out = {}
        for k in sorted(self.values):
            p, dot, rest = k.partition(".")
            if dot and p == prefix:
                out[rest] = self.values[k]
        return out

    def path(self, key: str) -> str | None:
        v = self.values.get(key)
        return None if v is None else resolve_path(self.base_dir, v)

    def render(self, exclude: tuple[str, ...] = ()) -> str:
        """The resolved settings in config-file syntax, deterministic order."""
        lines = [f"# {self.schema.command}"]
        for f in self.schema.fields:
            if f.name in exclude:
                continue
            lines.append(f"{f.name} = {_fmt(self.values.get(f.name))}")
        for k in sorted(k for k in self.values if "." in k and k not in exclude):
            lines.append(f"{k} = {_fmt(self.values[k])}")
        return "\n".join(lines) + "\n"

    def describe(self) -> str:
        """Defaults and help for every key, for ``--print-config``."""
        out = [f"# {self.schema.command} settings (current values; edit and pass with --config)"]
        for f in self.schema.fields:
            note = f.help + (" [required]" if f.required else "")
            if f.choices:
                note += f" (one of: {', '.join(map(str, f.choices))})"
            out.append(f"# {note}" if note else "#")
            out.append(f"{f.name} = {_fmt(self.values.get(f.name))}")
        for f in self.schema.families:
            out.append(f"# {f.name}.NAME: {f.help} (repeat for each NAME)")
        for k in sorted(k for k in self.values if "." in k):
            out.append(f"{k} = {_fmt(self.values[k])}")
        return "\n".join(out) + "\n"


def resolve_path(base: str, p: str) -> str:
    return p if os.path.isabs(p) else os.path.normpath(os.path.join(base, p))


def parse_config_text(text: str, source: str = "<config>") -> list[tuple[str, str, int]]:
    """(key, raw value, line number) for every setting line."""
    items = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, raw = line.partition("=")
        key = key.strip()
        if not eq or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        items.append((key, raw.strip(), lineno))
    return items


def build_config(schema: Schema, text: str | None = None, source: str = "<config>",
                 overrides: dict[str, str] | None = None, base_dir: str = ".",
                 check_paths: bool = True, check_required: bool = True) -> RunConfig:
    """Defaults, then the file, then ``overrides`` (later wins); validated."""
    values: dict[str, Any] = {f.name: f.default for f in schema.fields}
    seen: dict[str, int] = {}
    for key, raw, lineno in parse_config_text(text or "", source):
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: {key!r} already set on line {seen[key]}")
        seen[key] = lineno
        f = schema.field(key)
        try:
            values[key] = f.parse(raw)
        except ConfigError as e:
            raise ConfigError(f"{source}:{lineno}: {e}") from None
    for key, raw in (overrides or {}).items():
        values[key] = schema.field(key).parse(raw)
    cfg = RunConfig(schema, values, base_dir)
    if check_required:
        validate(cfg, check_paths)
    return cfg


def validate(cfg: RunConfig, check_paths: bool = True) -> None:
    schema = cfg.schema
    for f in schema.fields:
        if f.required and cfg.values.get(f.name) is None:
            raise ConfigError(f"{schema.command}: missing required key {f.name!r} ({f.help})")
    if schema.stochastic and cfg.values.get("seed") is None:
        raise ConfigError(f"{schema.command}: a seed is required")
    if not check_paths:
        return
    for key, v in cfg.values.items():
        if v is None:
            continue
        f = schema.field(key)
        if f.must_exist:
            p = resolve_path(cfg.base_dir, v)
            if not os.path.exists(p):
                raise ConfigError(f"{key}: input path {p!r} does not exist")
