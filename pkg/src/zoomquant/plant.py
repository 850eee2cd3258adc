"""LTI plant models, zero-order-hold discretization and structural checks."""

import configparser
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError
from .numerics import as_matrix, mat_exp, rank, DEFAULT_RANK_TOL


@dataclass(frozen=True)
class ContinuousPlant:
    """``dx/dt = A x + B u``, ``y = C x``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    state_names: tuple = ()
    input_names: tuple = ()
    output_names: tuple = ()

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        C = as_matrix(self.C, "C")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            # a flat list for single-input B is read as a column
            if B.shape == (1, n):
                B = B.T
            else:
                raise DimensionError(f"B must have {n} rows, got {B.shape}")
        if C.shape[1] != n:
            raise DimensionError(f"C must have {n} columns, got {C.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        for attr, count, stem in (
            ("state_names", n, "x"),
            ("input_names", B.shape[1], "u"),
            ("output_names", C.shape[0], "y"),
        ):
            names = tuple(getattr(self, attr))
            if not names:
                names = tuple(f"{stem}{i + 1}" for i in range(count))
            if len(names) != count:
                raise DimensionError(f"{attr} needs {count} labels, got {len(names)}")
            object.__setattr__(self, attr, names)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]


@dataclass(frozen=True)
class DiscretePlant:
    """Sampled plant ``x_{k+1} = A_d x_k + B_d u_k``, ``y_k = C x_k``."""

    A_d: np.ndarray
    B_d: np.ndarray
    C: np.ndarray
    h: float
    source: ContinuousPlant = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        A_d = as_matrix(self.A_d, "A_d")
        B_d = as_matrix(self.B_d, "B_d")
        C = as_matrix(self.C, "C")
        n = A_d.shape[0]
        if A_d.shape != (n, n) or B_d.shape[0] != n or C.shape[1] != n:
            raise DimensionError(
                f"inconsistent shapes A_d{A_d.shape} B_d{B_d.shape} C{C.shape}"
            )
        if not self.h > 0:
            raise ValueError("sampling period h must be positive")
        object.__setattr__(self, "A_d", A_d)
        object.__setattr__(self, "B_d", B_d)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "h", float(self.h))

    @property
    def n(self):
        return self.A_d.shape[0]

    @property
    def m(self):
        return self.B_d.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    def is_invertible(self):
        return abs(np.linalg.det(self.A_d)) > 0.0


def zoh_step_matrices(A, B, tau):
    """``(e^{A tau}, int_0^tau e^{As} ds B)`` from one augmented exponential."""
    n, m = B.shape
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = A
    aug[:n, n:] = B
    E = mat_exp(aug, tau)
    return E[:n, :n], E[:n, n:]


def discretize(plant, h):
    if not h > 0:
        raise ValueError(f"sampling period must be positive, got {h}")
    A_d, B_d = zoh_step_matrices(plant.A, plant.B, h)
    return DiscretePlant(A_d, B_d, plant.C.copy(), h, source=plant)


def observability_matrix(C, A, blocks):
    rows = [C]
    for _ in range(blocks - 1):
        rows.append(rows[-1] @ A)
    return np.vstack(rows)


def _pbh_ok(A, X, tol):
    """PBH rank test on every eigenvalue of ``A`` with modulus >= 1."""
    n = A.shape[0]
    for lam in np.linalg.eigvals(A):
        if abs(lam) >= 1.0:
            M = np.hstack([lam * np.eye(n) - A, X]).astype(complex)
            scale = float(np.max(np.abs(M)))
            sv = np.linalg.svd(M, compute_uv=False)
            if int(np.sum(sv > tol * scale)) < n:
                return False
    return True


def check_assumptions(dp, tol=DEFAULT_RANK_TOL):
    """Stabilizability, detectability and observability of ``dp``."""
    A, B, C = dp.A_d, dp.B_d, dp.C
    return {
        "stabilizable": _pbh_ok(A, B, tol),
        "detectable": _pbh_ok(A.T, C.T, tol),
        "observable": rank(observability_matrix(C, A, dp.n), tol) == dp.n,
    }


_PENDULUM = ContinuousPlant(
    A=[
        [0.0, 1.0, 0.0, 0.0],
        [0.0, -20.06, 53.26, -1.096],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, -20.01, 98.41, -2.025],
    ],
    B=[[0.0], [35.28], [0.0], [35.18]],
    C=[[1.0, 0.0, 1.0, 0.0]],
    state_names=(
        "arm angle",
        "arm angular velocity",
        "pendulum angle",
        "pendulum angular velocity",
    ),
    input_names=("motor voltage",),
    output_names=("arm angle + pendulum angle",),
)

# Same dynamics with both angles measured separately. Data-rate figures
# reported for this pendulum (N^2 sizes, 2x2 measurement covariance) only
# make sense for this two-output variant.
_PENDULUM_2OUT = ContinuousPlant(
    A=_PENDULUM.A,
    B=_PENDULUM.B,
    C=[[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
    state_names=_PENDULUM.state_names,
    input_names=_PENDULUM.input_names,
    output_names=("arm angle", "pendulum angle"),
)

_CATALOG = {
    "inverted_pendulum": _PENDULUM,
    "inverted_pendulum_2out": _PENDULUM_2OUT,
}


def benchmark(name):
    try:
        return _CATALOG[name]
    except KeyError:
        raise KeyError(
            f"unknown plant {name!r}; known: {', '.join(sorted(_CATALOG))}"
        ) from None


def register_benchmark(name, plant):
    if not isinstance(plant, ContinuousPlant):
        raise TypeError("plant must be a ContinuousPlant")
    _CATALOG[name] = plant


def benchmark_names():
    return sorted(_CATALOG)


# --- plant definition files -------------------------------------------------


def parse_number_list(text):
    items = text.replace(",", " ").replace(";", " ").split()
    try:
        return [float(v) for v in items]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}: {exc}") from None


def _parse_labels(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def parse_plant_text(text):
    """Parse a ``key = value`` plant definition.

    Required keys are ``n``, ``m``, ``p`` and the row-major lists ``A``,
    ``B``, ``C``. Optional keys ``state_names``, ``input_names`` and
    ``output_names`` take comma-separated labels. An optional ``[plant]``
    header is accepted.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    body = text if text.lstrip().startswith("[") else "[plant]\n" + text
    try:
        parser.read_string(body)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable plant file: {exc}") from None
    if "plant" not in parser:
        raise ConfigError("plant file has no [plant] section")
    return plant_from_mapping(parser["plant"])


def plant_from_mapping(sec):
    try:
        n, m, p = (int(sec[k]) for k in ("n", "m", "p"))
        A = parse_number_list(sec["A"])
        B = parse_number_list(sec["B"])
        C = parse_number_list(sec["C"])
    except KeyError as exc:
        raise ConfigError(f"plant definition missing key {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"plant dimensions must be integers: {exc}") from None
    for name, vals, size in (("A", A, n * n), ("B", B, n * m), ("C", C, p * n)):
        if len(vals) != size:
            raise ConfigError(f"{name} needs {size} entries, got {len(vals)}")
    kwargs = {}
    for key in ("state_names", "input_names", "output_names"):
        if key in sec:
            kwargs[key] = _parse_labels(sec[key])
    try:
        return ContinuousPlant(
            A=np.reshape(A, (n, n)),
            B=np.reshape(B, (n, m)),
            C=np.reshape(C, (p, n)),
            **kwargs,
        )
    except (DimensionError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_plant_file(path):
    with open(path) as fh:
        return parse_plant_text(fh.read())


def format_plant_text(plant):
    def row_major(M):
        return ", ".join(repr(float(v)) for v in np.ravel(M))

    lines = [
        "[plant]",
        f"n = {plant.n}",
        f"m = {plant.m}",
        f"p = {plant.p}",
        f"A = {row_major(plant.A)}",
        f"B = {row_major(plant.B)}",
        f"C = {row_major(plant.C)}",
        f"state_names = {', '.join(plant.state_names)}",
        f"input_names = {', '.join(plant.input_names)}",
        f"output_names = {', '.join(plant.output_names)}",
    ]
    return "\n".join(lines) + "\n"
