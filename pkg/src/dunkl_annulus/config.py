"""Run configuration: a small line-oriented format with [section] headers
and key = value pairs, validated all at once (every violation is reported,
not just the first)."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config", "render_config"]


@dataclass
class RunConfig:
    """Validated settings for one command-line run."""

    dimension: int = 3
    rho: float = 0.5
    kind: str = "trivial"
    multiplicities: tuple[float, ...] = ()
    max_degree: int = 160
    tol: float = 1e-8
    sphere_order: int = 0  # 0 = pick per dimension
    radial_order: int = 24
    mu_order: int = 24
    seed: int = 42
    samples: int = 20
    dirichlet_outer: str = "one"
    dirichlet_inner: str = "one"
    green_pairs: int = 20
    green_route: str = "both"
    potential_density: str = "one"
    potential_cutoff: float = 0.0  # 0 = automatic
    semilinear_phi1: str = "one"
    semilinear_phi2: str = "linear"
    semilinear_boundary: str = "one"
    semilinear_tol: float = 1e-6
    semilinear_max_iter: int = 100
    semilinear_damping: float = 1.0

    def resolved_sphere_order(self) -> int:
        if self.sphere_order > 0:
            return self.sphere_order
        return 256 if self.dimension == 2 else 32


# (section, key) -> (attribute, converter)
_SCHEMA: dict[tuple[str, str], tuple[str, Any]] = {
    ("domain", "dimension"): ("dimension", int),
    ("domain", "rho"): ("rho", float),
    ("root_system", "kind"): ("kind", str),
    ("root_system", "multiplicities"): ("multiplicities", "floats"),
    ("series", "max_degree"): ("max_degree", int),
    ("series", "tol"): ("tol", float),
    ("quadrature", "sphere_order"): ("sphere_order", int),
    ("quadrature", "radial_order"): ("radial_order", int),
    ("quadrature", "mu_order"): ("mu_order", int),
    ("run", "seed"): ("seed", int),
    ("run", "samples"): ("samples", int),
    ("dirichlet", "outer"): ("dirichlet_outer", str),
    ("dirichlet", "inner"): ("dirichlet_inner", str),
    ("green", "pairs"): ("green_pairs", int),
    ("green", "route"): ("green_route", str),
    ("potential", "density"): ("potential_density", str),
    ("potential", "cutoff"): ("potential_cutoff", float),
    ("semilinear", "phi1"): ("semilinear_phi1", str),
    ("semilinear", "phi2"): ("semilinear_phi2", str),
    ("semilinear", "boundary"): ("semilinear_boundary", str),
    ("semilinear", "tol"): ("semilinear_tol", float),
    ("semilinear", "max_iter"): ("semilinear_max_iter", int),
    ("semilinear", "damping"): ("semilinear_damping", float),
}

_SECTIONS = sorted({sec for sec, _ in _SCHEMA})


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError carrying every violation."""
    violations: list[str] = []
    values: dict[str, Any] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                violations.append(f"line {lineno}: unknown section [{section}]")
                section = None
            continue
        if "=" not in line:
            violations.append(f"line {lineno}: expected key = value, got {line!r}")
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if section is None:
            violations.append(f"line {lineno}: key {key!r} outside any section")
            continue
        entry = _SCHEMA.get((section, key))
        if entry is None:
            violations.append(f"line {lineno}: unknown key {key!r} in [{section}]")
            continue
        attr, conv = entry
        try:
            if conv == "floats":
                parts = val.replace(",", " ").split()
                values[attr] = tuple(float(p) for p in parts)
            else:
                values[attr] = conv(val)
        except ValueError:
            violations.append(f"line {lineno}: cannot parse value {val!r} for {key!r}")
    cfg = RunConfig(**values) if not violations else None
    if cfg is not None:
        violations.extend(_validate(cfg))
    if violations:
        raise ConfigError(violations)
    return cfg


def _validate(cfg: RunConfig) -> list[str]:
    out = []
    if cfg.dimension not in (2, 3):
        out.append("dimension must be 2 or 3")
    if not 0.0 < cfg.rho < 1.0:
        out.append("rho must lie in (0,1)")
    if cfg.kind not in ("trivial", "sign"):
        out.append("root system kind must be 'trivial' or 'sign'")
    if cfg.kind == "trivial" and cfg.multiplicities:
        out.append("the trivial root system carries no multiplicities")
    if cfg.kind == "sign":
        if not cfg.multiplicities:
            out.append("sign kind needs at least one multiplicity")
        elif cfg.dimension in (2, 3) and len(cfg.multiplicities) > cfg.dimension:
            out.append("more multiplicities than dimensions")
        if any(k < 0 for k in cfg.multiplicities):
            out.append("multiplicities must be nonnegative")
    if cfg.dimension in (2, 3):
        gamma = sum(cfg.multiplicities) if cfg.kind == "sign" else 0.0
        lam = cfg.dimension / 2.0 + gamma - 1.0
        if not lam > 0:
            out.append("lambda_k must be positive")
    if cfg.max_degree < 1:
        out.append("series max_degree must be >= 1")
    if not cfg.tol > 0:
        out.append("series tol must be positive")
    for name in ("radial_order", "mu_order"):
        if getattr(cfg, name) < 1:
            out.append(f"{name} must be >= 1")
    if cfg.sphere_order < 0:
        out.append("sphere_order must be >= 0 (0 selects a default)")
    if cfg.samples < 1:
        out.append("samples must be >= 1")
    if cfg.green_pairs < 1:
        out.append("green pairs must be >= 1")
    if cfg.green_route not in ("series", "definition", "both"):
        out.append("green route must be series, definition, or both")
    if not cfg.semilinear_tol > 0:
        out.append("semilinear tol must be positive")
    if cfg.semilinear_max_iter < 1:
        out.append("semilinear max_iter must be >= 1")
    if not 0.0 < cfg.semilinear_damping <= 1.0:
        out.append("semilinear damping must lie in (0,1]")
    if cfg.potential_cutoff < 0:
        out.append("potential cutoff must be >= 0 (0 selects a default)")
    return out


def render_config(cfg: RunConfig) -> str:
    """Canonical text that parses back to an equal RunConfig."""
    by_section: dict[str, list[str]] = {s: [] for s in _SECTIONS}
    for (section, key), (attr, conv) in sorted(_SCHEMA.items()):
        val = getattr(cfg, attr)
        if conv == "floats":
            rendered = " ".join(repr(v) for v in val)
        else:
            rendered = repr(val) if not isinstance(val, str) else val
        by_section[section].append(f"{key} = {rendered}")
    chunks = []
    for section in _SECTIONS:
        lines = by_section[section]
        if lines:
            chunks.append(f"[{section}]")
            chunks.extend(lines)
            chunks.append("")
    return "\n".join(chunks)
