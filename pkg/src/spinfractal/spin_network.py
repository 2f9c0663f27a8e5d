"""Single-excitation Hamiltonians for spin chains and rings.

Networks are described declaratively by :class:`NetworkSpec` and realized as
real symmetric matrices on the single-excitation subspace (hbar = 1, all
quantities dimensionless).  Node indices are 1-based in every public
interface; array indices are 0-based internally.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SpecError

TOPOLOGIES = ("chain", "ring")
COUPLING_PROFILES = ("uniform", "engineered")
COUPLING_MODELS = ("xx", "heisenberg")

# Site-dependent diagonal used for the heisenberg model: diag[i] = -sum_j J_ij.
# Any constant diagonal shift leaves the spectral projectors (and everything
# downstream) unchanged, so only the site-dependent part matters.
HEISENBERG_DIAGONAL_CONVENTION = "diag[i] = -sum_j J_ij"


@dataclass(frozen=True)
class Bias:
    """On-site energy added to one spin's diagonal entry (node is 1-based)."""

    node: int
    magnitude: float


@dataclass(frozen=True)
class NetworkSpec:
    """Declarative description of a spin network."""

    topology: str
    n: int
    coupling_profile: str = "uniform"
    coupling_model: str = "xx"
    bias: Optional[Bias] = None

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise SpecError(f"unknown topology {self.topology!r}; expected one of {TOPOLOGIES}")
        if self.coupling_profile not in COUPLING_PROFILES:
            raise SpecError(
                f"unknown coupling_profile {self.coupling_profile!r}; "
                f"expected one of {COUPLING_PROFILES}"
            )
        if self.coupling_model not in COUPLING_MODELS:
            raise SpecError(
                f"unknown coupling_model {self.coupling_model!r}; "
                f"expected one of {COUPLING_MODELS}"
            )
        if not isinstance(self.n, int) or self.n < 2:
            raise SpecError(f"n must be an integer >= 2, got {self.n!r}")
        if self.coupling_profile == "engineered" and self.topology != "chain":
            raise SpecError("engineered couplings are only defined for chains")
        if self.bias is not None:
            if not isinstance(self.bias.node, int) or not 1 <= self.bias.node <= self.n:
                raise SpecError(
                    f"bias node {self.bias.node!r} out of range [1, {self.n}]"
                )

    def name(self) -> str:
        """Short deterministic identifier, e.g. 'chain_n105_engineered'."""
        parts = [f"{self.topology}_n{self.n}"]
        if self.coupling_profile != "uniform":
            parts.append(self.coupling_profile)
        if self.coupling_model != "xx":
            parts.append(self.coupling_model)
        if self.bias is not None:
            mag = self.bias.magnitude
            mag_s = f"{mag:g}".replace(".", "p").replace("-", "m")
            parts.append(f"bias{mag_s}at{self.bias.node}")
        return "_".join(parts)

    def to_dict(self) -> dict:
        d = {
            "topology": self.topology,
            "n": self.n,
            "coupling_profile": self.coupling_profile,
            "coupling_model": self.coupling_model,
        }
        if self.bias is not None:
            d["bias"] = {"node": self.bias.node, "magnitude": self.bias.magnitude}
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkSpec":
        if not isinstance(data, dict):
            raise SpecError(f"network spec must be a JSON object, got {type(data).__name__}")
        allowed = {"topology", "n", "coupling_profile", "coupling_model", "bias"}
        unknown = set(data) - allowed
        if unknown:
            raise SpecError(f"unknown network spec fields: {sorted(unknown)}")
        for required in ("topology", "n"):
            if required not in data:
                raise SpecError(f"network spec missing required field {required!r}")
        bias = None
        raw_bias = data.get("bias")
        if raw_bias is not None:
            if not isinstance(raw_bias, dict):
                raise SpecError("bias must be an object with fields 'node' and 'magnitude'")
            unknown_bias = set(raw_bias) - {"node", "magnitude"}
            if unknown_bias:
                raise SpecError(f"unknown bias fields: {sorted(unknown_bias)}")
            if "node" not in raw_bias or "magnitude" not in raw_bias:
                raise SpecError("bias requires both 'node' and 'magnitude'")
            bias = Bias(node=raw_bias["node"], magnitude=float(raw_bias["magnitude"]))
        return cls(
            topology=data["topology"],
            n=data["n"],
            coupling_profile=data.get("coupling_profile", "uniform"),
            coupling_model=data.get("coupling_model", "xx"),
            bias=bias,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NetworkSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON for network spec: {exc}") from exc
        return cls.from_dict(data)


@dataclass(frozen=True)
class Hamiltonian:
    """Real symmetric matrix on the single-excitation subspace."""

    matrix: np.ndarray
    spec: Optional[NetworkSpec] = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def engineered_coupling(k: int, n: int) -> float:
    """Coupling between sites k and k+1 (1-based) of an engineered chain.

    Returns sqrt(k*(n-k))/2, the profile that produces perfect end-to-end
    excitation transfer.  No rescaling to unit maximum is applied; the
    transfer-probability bound is invariant under uniform coupling scaling.
    """
    if not 1 <= k <= n - 1:
        raise SpecError(f"coupling index k={k} out of range [1, {n - 1}]")
    return 0.5 * math.sqrt(k * (n - k))


def _couplings(spec: NetworkSpec) -> np.ndarray:
    """Nearest-neighbour couplings J[k] between sites k+1 and k+2 (0-based k).

    For rings the last entry couples site n and site 1.
    """
    n_bonds = spec.n - 1 if spec.topology == "chain" else spec.n
    if spec.coupling_profile == "uniform":
        return np.ones(n_bonds)
    return np.array([engineered_coupling(k, spec.n) for k in range(1, spec.n)])


def build_network(spec: NetworkSpec) -> Hamiltonian:
    """Construct the single-excitation Hamiltonian for a network spec.

    The off-diagonals carry the coupling profile; the diagonal is zero for
    the xx model and -sum_j J_ij per site for heisenberg.  A bias adds its
    magnitude to the biased node's diagonal entry.  Symmetric entries are
    assigned from the same float so the matrix is symmetric bit-for-bit.
    """
    n = spec.n
    couplings = _couplings(spec)
    h = np.zeros((n, n))
    for k in range(n - 1):
        h[k, k + 1] = couplings[k]
        h[k + 1, k] = couplings[k]
    if spec.topology == "ring":
        h[0, n - 1] = couplings[n - 1]
        h[n - 1, 0] = couplings[n - 1]
    if spec.coupling_model == "heisenberg":
        row_sums = h.sum(axis=1)  # diagonal still zero here
        for i in range(n):
            h[i, i] = -row_sums[i]
    if spec.bias is not None:
        i = spec.bias.node - 1
        h[i, i] += spec.bias.magnitude
    return Hamiltonian(matrix=h, spec=spec)
