"""Parameter containers and validation.

The volatility model is parameterized by

    X_t = sigma_t * Z_t
    ln(sigma_t^2) = omega + [alpha(B)/beta(B)] (1 - B^s)^(-d) g(Z_{t-1})
    g(z) = theta*z + gamma*(|z| - E|Z|)

with lag polynomials alpha(z) = 1 - alpha_1 z - ... - alpha_p z^p and
beta(z) = 1 - beta_1 z - ... - beta_q z^q (the coefficient on z^0 is +1 in
both; stored parameters are alpha_1..alpha_p, beta_1..beta_q).  The mean
equation is a constrained ARMA with sparse lag maps,

    r_t = mu + sum_k phi_k (r_{t-k} - mu) + sum_j vartheta_j X_{t-j} + X_t.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParameterError

ROOT_MARGIN = 1e-8
COMMON_ROOT_TOL = 1e-10


@dataclass(frozen=True)
class InnovationDist:
    """Innovation law: standard Gaussian or variance-one GED(nu), nu > 1."""

    kind: str = "gaussian"
    nu: float | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "ged"):
            raise InvalidParameterError(f"unknown innovation kind {self.kind!r}")
        if self.kind == "ged":
            if self.nu is None or not math.isfinite(self.nu) or self.nu <= 1:
                raise InvalidParameterError("GED requires tail-thickness nu > 1")

    @property
    def effective_nu(self) -> float:
        """Gaussian is GED with nu = 2 for every moment formula."""
        return 2.0 if self.kind == "gaussian" else float(self.nu)


GAUSSIAN = InnovationDist("gaussian")


@dataclass(frozen=True)
class SfiegarchSpec:
    omega: float = 0.0
    theta: float = 0.0
    gamma_mag: float = 0.0
    d: float = 0.0
    s: int = 1
    alpha: tuple = ()
    beta: tuple = ()
    innovation: InnovationDist = GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))

    @property
    def p(self) -> int:
        return len(self.alpha)

    @property
    def q(self) -> int:
        return len(self.beta)

    def alpha_poly(self) -> np.ndarray:
        """Coefficients of alpha(z) in increasing powers: [1, -a1, ..., -ap]."""
        return np.concatenate(([1.0], -np.asarray(self.alpha, dtype=float)))

    def beta_poly(self) -> np.ndarray:
        """Coefficients of beta(z) in increasing powers: [1, -b1, ..., -bq]."""
        return np.concatenate(([1.0], -np.asarray(self.beta, dtype=float)))


@dataclass(frozen=True)
class ArmaSpec:
    """Constrained ARMA mean equation with sparse lag -> coefficient maps."""

    mu: float = 0.0
    ar: dict = field(default_factory=dict)
    ma: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "ar", {int(k): float(v) for k, v in self.ar.items()})
        object.__setattr__(self, "ma", {int(k): float(v) for k, v in self.ma.items()})
        if any(k < 1 for k in self.ar) or any(k < 1 for k in self.ma):
            raise InvalidParameterError("ARMA lag indices must be >= 1")

    @property
    def max_lag(self) -> int:
        return max([0, *self.ar.keys(), *self.ma.keys()])

    def ar_poly(self) -> np.ndarray:
        """AR polynomial 1 - sum phi_k z^k as a dense coefficient array."""
        out = np.zeros(max([0, *self.ar.keys()]) + 1)
        out[0] = 1.0
        for lag, c in self.ar.items():
            out[lag] = -c
        return out

    def ma_poly(self) -> np.ndarray:
        """MA polynomial 1 + sum vartheta_j z^j as a dense coefficient array."""
        out = np.zeros(max([0, *self.ma.keys()]) + 1)
        out[0] = 1.0
        for lag, c in self.ma.items():
            out[lag] = c
        return out


WHITE_NOISE_ARMA = ArmaSpec()


def poly_root_moduli(coefs) -> np.ndarray:
    """Moduli of the roots of c_0 + c_1 z + ... + c_n z^n (empty if degree 0)."""
    c = np.trim_zeros(np.asarray(coefs, dtype=float), "b")
    if c.size <= 1:
        return np.empty(0)
    return np.abs(np.roots(c[::-1]))


def resultant(a, b) -> float:
    """Resultant of two polynomials (increasing-power coefficients) via Sylvester."""
    a = np.trim_zeros(np.asarray(a, dtype=float), "b")
    b = np.trim_zeros(np.asarray(b, dtype=float), "b")
    n, m = a.size - 1, b.size - 1
    if n <= 0 or m <= 0:
        return np.inf  # a constant polynomial shares no roots with anything
    syl = np.zeros((n + m, n + m))
    for i in range(m):
        syl[i, i : i + n + 1] = a[::-1]
    for i in range(n):
        syl[m + i, i : i + m + 1] = b[::-1]
    return float(np.linalg.det(syl))


def has_common_root(spec: SfiegarchSpec, tol: float = COMMON_ROOT_TOL) -> bool:
    if spec.p == 0 or spec.q == 0:
        return False
    return abs(resultant(spec.alpha_poly(), spec.beta_poly())) < tol


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple
    diagnostics: dict

    def __bool__(self):
        return self.ok


def validate(spec: SfiegarchSpec) -> ValidationReport:
    """Check the side conditions of the model definition.

    Report-style and total: never raises on finite inputs, returns the list of
    violated conditions together with root-modulus / d-range diagnostics.
    """
    violations = []
    diag = {}

    values = [spec.omega, spec.theta, spec.gamma_mag, spec.d, *spec.alpha, *spec.beta]
    if not all(math.isfinite(v) for v in values):
        violations.append("non-finite parameter")
    if not (isinstance(spec.s, (int, np.integer)) and spec.s >= 1):
        violations.append("season length s must be a positive integer")

    if math.isfinite(spec.d):
        diag["d"] = float(spec.d)
        if spec.d >= 0.5:
            violations.append("existence requires d < 0.5")
        if not (-1.0 < spec.d < 0.5):
            violations.append("invertibility requires d in (-1, 0.5)")

    if spec.theta == 0.0 and spec.gamma_mag == 0.0:
        violations.append("g degenerate: theta and gamma_mag both zero")

    if all(math.isfinite(b) for b in spec.beta):
        beta_moduli = poly_root_moduli(spec.beta_poly())
        diag["beta_root_moduli"] = beta_moduli.tolist()
        if beta_moduli.size and beta_moduli.min() <= 1.0 + ROOT_MARGIN:
            violations.append("beta root in closed unit disk")

    if all(math.isfinite(a) for a in spec.alpha):
        alpha_moduli = poly_root_moduli(spec.alpha_poly())
        diag["alpha_root_moduli"] = alpha_moduli.tolist()

    if all(math.isfinite(v) for v in (*spec.alpha, *spec.beta)):
        if has_common_root(spec):
            violations.append("alpha and beta share a common root")

    return ValidationReport(ok=not violations, violations=tuple(violations), diagnostics=diag)


def special_case_of(spec: SfiegarchSpec) -> str:
    """Classify the spec: d = 0 collapses the fractional filter, s = 1 the season."""
    if spec.d == 0.0:
        return "egarch"
    if spec.s == 1:
        return "fiegarch"
    return "sfiegarch"


def spec_to_dict(spec: SfiegarchSpec, arma: ArmaSpec | None = None) -> dict:
    doc = {
        "omega": spec.omega,
        "theta": spec.theta,
        "gamma": spec.gamma_mag,
        "d": spec.d,
        "s": int(spec.s),
        "alpha": list(spec.alpha),
        "beta": list(spec.beta),
        "innovation": {"kind": spec.innovation.kind}
        | ({"nu": spec.innovation.nu} if spec.innovation.kind == "ged" else {}),
    }
    if arma is not None:
        doc["arma"] = {
            "mu": arma.mu,
            "ar": {str(k): v for k, v in sorted(arma.ar.items())},
            "ma": {str(k): v for k, v in sorted(arma.ma.items())},
        }
    return doc


def spec_to_json(spec: SfiegarchSpec, arma: ArmaSpec | None = None) -> str:
    """Canonical JSON form; serialize -> parse -> serialize is byte-identical."""
    return json.dumps(spec_to_dict(spec, arma), sort_keys=True, separators=(",", ":"))


def spec_from_dict(doc: dict) -> tuple:
    inn = doc.get("innovation", {"kind": "gaussian"})
    dist = InnovationDist(inn.get("kind", "gaussian"), inn.get("nu"))
    spec = SfiegarchSpec(
        omega=float(doc.get("omega", 0.0)),
        theta=float(doc.get("theta", 0.0)),
        gamma_mag=float(doc.get("gamma", 0.0)),
        d=float(doc.get("d", 0.0)),
        s=int(doc.get("s", 1)),
        alpha=doc.get("alpha", ()),
        beta=doc.get("beta", ()),
        innovation=dist,
    )
    arma = None
    if "arma" in doc:
        a = doc["arma"]
        arma = ArmaSpec(
            mu=float(a.get("mu", 0.0)),
            ar={int(k): float(v) for k, v in a.get("ar", {}).items()},
            ma={int(k): float(v) for k, v in a.get("ma", {}).items()},
        )
    return spec, arma


def spec_from_json(text: str) -> tuple:
    return spec_from_dict(json.loads(text))


def with_innovation(spec: SfiegarchSpec, dist: InnovationDist) -> SfiegarchSpec:
    return replace(spec, innovation=dist)
