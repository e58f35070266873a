"""Flat dotted-key run configuration for the command-line frontend.

Format: one `key = value` per line, `#` comments, blank lines ignored.
Keys live in dotted sections (params.*, truncation.*, grid.*, freq.*,
simulate.*, covcheck.*, eigs.*, limits.*, rkhsnorm.*) plus the top-level
`seed` and `out`.  Every key mirrors a RunConfig field; an unknown key is
a hard error so a typo in H or seed can never pass silently.  Values are
validated against the library preconditions before any computation runs.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import ConfigError, DomainError
from .field import FreqGrid
from .kernel import ModelParams
from .limits import EXAMPLES


def _parse_int(text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _parse_float(text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None
    if math.isnan(v):
        raise ConfigError("NaN is not a valid config value")
    return v


def _parse_floats(text):
    return tuple(_parse_float(tok) for tok in text.split())


def _parse_ints(text):
    return tuple(_parse_int(tok) for tok in text.split())


def _parse_points(text):
    """Points separated by ';', coordinates by whitespace."""
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        pts.append(_parse_floats(chunk))
    if not pts:
        raise ConfigError("empty point list")
    width = len(pts[0])
    if any(len(p) != width for p in pts):
        raise ConfigError("points must all have the same dimension")
    return tuple(pts)


def _parse_str(text):
    return text


_SCHEMA = {
    "params.N": (_parse_int, 2),
    "params.H": (_parse_float, 0.5),
    "truncation.m0": (_parse_int, 4),
    "truncation.n0": (_parse_int, 8),
    "grid.size": (_parse_int, 64),
    "grid.n_keep": (_parse_int, 12),
    "seed": (_parse_int, 0),
    "out": (_parse_str, "."),
    "freq.shells": (_parse_int, 256),
    "freq.p_min": (_parse_float, 1e-3),
    "freq.p_max": (_parse_float, 1e3),
    "simulate.method": (_parse_str, "cholesky"),
    "simulate.points": (_parse_points, None),
    "simulate.replica": (_parse_int, 0),
    "simulate.band": (_parse_floats, None),
    "covcheck.m_max": (_parse_int, 4),
    "covcheck.radii": (_parse_int, 4),
    "covcheck.nodes": (_parse_int, 400),
    "eigs.grids": (_parse_ints, None),
    "eigs.n_top": (_parse_int, 8),
    "limits.example": (_parse_str, "local_lil"),
    "limits.schedule": (_parse_floats, None),
    "limits.member_cap": (_parse_int, 256),
    "limits.grid_radii": (_parse_floats, (0.35, 0.7, 0.98)),
    "limits.grid_angles": (_parse_int, 8),
    "limits.enter_point": (_parse_floats, None),
    "limits.enter_scale": (_parse_float, 0.7),
    "rkhsnorm.coeffs": (_parse_str, None),
    "rkhsnorm.point": (_parse_floats, None),
}

_METHODS = ("kl", "cholesky", "spectral")


@dataclass(frozen=True)
class RunConfig:
    """Typed view of a config file, validated before use."""
    params: ModelParams
    truncation: Tuple[int, int]
    grid_size: int
    n_keep: int
    seed: int
    out: str
    freq_grid: FreqGrid
    simulate_method: str
    simulate_points: Optional[tuple]
    simulate_replica: int
    simulate_band: Optional[Tuple[float, float]]
    covcheck_m_max: int
    covcheck_radii: int
    covcheck_nodes: int
    eigs_grids: Tuple[int, ...]
    eigs_n_top: int
    limits_example: str
    limits_schedule: Optional[tuple]
    limits_member_cap: int
    limits_grid_radii: tuple
    limits_grid_angles: int
    limits_enter_point: Optional[tuple]
    limits_enter_scale: float
    rkhs_coeffs: Optional[str]
    rkhs_point: Optional[tuple]


def parse_config(text) -> RunConfig:
    """Parse config text into a validated RunConfig.

    Raises ConfigError on unknown keys, malformed lines or values that
    violate a module precondition.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(
                f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    values = {}
    for key, (parser, default) in _SCHEMA.items():
        values[key] = parser(raw[key]) if key in raw else default
    return _validate(values)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _validate(v) -> RunConfig:
    N, H = v["params.N"], v["params.H"]
    if N < 1:
        raise ConfigError(f"params.N must be >= 1, got {N}")
    if not 0.0 < H < 1.0:
        raise ConfigError(f"params.H must lie in (0,1), got {H}")
    m0, n0 = v["truncation.m0"], v["truncation.n0"]
    if m0 < 0 or n0 < 1:
        raise ConfigError(
            f"truncation needs m0 >= 0 and n0 >= 1, got ({m0},{n0})")
    if v["grid.size"] < 8:
        raise ConfigError(f"grid.size must be >= 8, got {v['grid.size']}")
    if not 1 <= v["grid.n_keep"] <= v["grid.size"]:
        raise ConfigError("grid.n_keep must lie in [1, grid.size]")
    if v["seed"] < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got "
                          f"{v['seed']}")
    try:
        freq = FreqGrid(shells=v["freq.shells"], p_min=v["freq.p_min"],
                        p_max=v["freq.p_max"])
    except DomainError as exc:
        raise ConfigError(f"freq.*: {exc}") from None
    method = v["simulate.method"]
    if method not in _METHODS:
        raise ConfigError(
            f"simulate.method must be one of {_METHODS}, got {method!r}")
    band = v["simulate.band"]
    if band is not None:
        if len(band) != 2 or not 0.0 <= band[0] < band[1]:
            raise ConfigError(
                f"simulate.band must be 'a b' with 0 <= a < b, got {band}")
        band = (float(band[0]), float(band[1]))
    points = v["simulate.points"]
    if points is not None and len(points[0]) != N:
        raise ConfigError(
            f"simulate.points are {len(points[0])}-dimensional but "
            f"params.N = {N}")
    if v["covcheck.m_max"] < 0 or v["covcheck.radii"] < 1:
        raise ConfigError("covcheck needs m_max >= 0 and radii >= 1")
    if v["covcheck.nodes"] < 8:
        raise ConfigError("covcheck.nodes must be >= 8")
    grids = v["eigs.grids"]
    if grids is None:
        grids = (v["grid.size"], 2 * v["grid.size"])
    if len(grids) < 2 or any(b <= a for a, b in zip(grids, grids[1:])):
        raise ConfigError(
            f"eigs.grids must be >= 2 strictly increasing sizes, got {grids}")
    if v["eigs.n_top"] < 1:
        raise ConfigError("eigs.n_top must be >= 1")
    if v["limits.example"] not in EXAMPLES:
        raise ConfigError(
            f"limits.example must be one of {EXAMPLES}, got "
            f"{v['limits.example']!r}")
    schedule = v["limits.schedule"]
    if schedule is not None and len(schedule) == 0:
        raise ConfigError("limits.schedule must not be empty")
    if v["limits.member_cap"] < 1:
        raise ConfigError("limits.member_cap must be >= 1")
    radii = v["limits.grid_radii"]
    if not radii or any(not 0.0 < r <= 1.0 for r in radii):
        raise ConfigError("limits.grid_radii must lie in (0,1]")
    if v["limits.grid_angles"] < 1:
        raise ConfigError("limits.grid_angles must be >= 1")
    enter_point = v["limits.enter_point"]
    if enter_point is not None and len(enter_point) != N:
        raise ConfigError(
            f"limits.enter_point must have {N} coordinates")
    if not 0.0 < v["limits.enter_scale"] < 1.0:
        raise ConfigError("limits.enter_scale must lie in (0,1)")
    rk_point = v["rkhsnorm.point"]
    if rk_point is not None and len(rk_point) != N:
        raise ConfigError(f"rkhsnorm.point must have {N} coordinates")
    return RunConfig(
        params=ModelParams(N=N, H=H),
        truncation=(m0, n0),
        grid_size=v["grid.size"],
        n_keep=v["grid.n_keep"],
        seed=v["seed"],
        out=v["out"],
        freq_grid=freq,
        simulate_method=method,
        simulate_points=points,
        simulate_replica=v["simulate.replica"],
        simulate_band=band,
        covcheck_m_max=v["covcheck.m_max"],
        covcheck_radii=v["covcheck.radii"],
        covcheck_nodes=v["covcheck.nodes"],
        eigs_grids=tuple(grids),
        eigs_n_top=v["eigs.n_top"],
        limits_example=v["limits.example"],
        limits_schedule=schedule,
        limits_member_cap=v["limits.member_cap"],
        limits_grid_radii=tuple(radii),
        limits_grid_angles=v["limits.grid_angles"],
        limits_enter_point=enter_point,
        limits_enter_scale=v["limits.enter_scale"],
        rkhs_coeffs=v["rkhsnorm.coeffs"],
        rkhs_point=rk_point,
    )
