"""Uniform entry point over the three simulators."""

from __future__ import annotations

from .circuit import Circuit
from .dense import run_density, run_trajectories
from .distribution import OutcomeDistribution
from .noise import NoiseModel, is_clifford_compatible
from .stabilizer import StabilizerUnsupportedError, _check_stabilizer_compatible, run_stabilizer

BACKENDS = ("density", "trajectory", "stabilizer")
_ALIASES = {"dense-exact": "density", "exact": "density", "trajectories": "trajectory", "stoch": "trajectory",
            "stab": "stabilizer"}


class BackendError(ValueError):
    pass


def resolve_backend(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in BACKENDS:
        raise BackendError(f"unknown backend {name!r}; choose from {', '.join(BACKENDS)}")
    return name


def check_compatible(backend: str, nm: NoiseModel | None, c: Circuit | None = None) -> None:
    """Reject backend/noise (and optionally circuit) combinations up front."""
    backend = resolve_backend(backend)
    if backend != "stabilizer":
        return
    if nm is not None and not nm.is_noiseless and not is_clifford_compatible(nm.channel):
        raise BackendError(
            f"{nm.channel.kind.value} noise cannot be simulated with the stabilizer backend; "
            "use the trajectory backend"
        )
    if c is not None:
        try:
            _check_stabilizer_compatible(c, nm)
        except StabilizerUnsupportedError as e:
            raise BackendError(str(e)) from None


def simulate(c: Circuit, nm: NoiseModel | None = None, backend: str = "stabilizer", shots: int = 2000,
             seed: int | None = None, *, sparse: bool = False) -> OutcomeDistribution:
    backend = resolve_backend(backend)
    check_compatible(backend, nm, c)
    if backend == "density":
        return run_density(c, nm)
    if backend == "trajectory":
        return run_trajectories(c, nm, shots, seed=seed, sparse=sparse)
    return run_stabilizer(c, nm, shots, seed=seed)
