"""
Генераторы случайных экземпляров (с явным numpy.random.Generator) и
усеченных конечномерных версий бесконечномерных примеров.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.models.measure import BistochasticMatrix, ClassicalFunction, FiniteMeasureSpace
from app.models.operators import State
from app.models.povm import Povm, QuantumRandomVariable

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def derive_seeds(seed: int, count: int) -> list[int]:
    """Независимые seed'ы для пачек; порядок детерминирован."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def random_complex(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng: np.random.Generator, d: int, *, real: bool = False) -> np.ndarray:
    a = rng.standard_normal((d, d)) if real else random_complex(rng, (d, d))
    return (a + a.conj().T) / 2


def random_psd(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    g = random_complex(rng, (d, rank or d))
    return g @ g.conj().T / (rank or d)


def haar_pure_state(rng: np.random.Generator, d: int) -> State:
    return State.pure(random_complex(rng, (d,)))


def random_state(rng: np.random.Generator, d: int, *, full_rank: bool = True) -> State:
    m = random_psd(rng, d, None if full_rank else max(1, d - 1))
    if full_rank:
        m = m + 1e-3 * np.trace(m).real * np.eye(d)
    return State.normalized(m)


def sample_states(rng: np.random.Generator, d: int, count: int) -> np.ndarray:
    """Пачка состояний, половина чистых (Хаар) и половина смесей; форма (count, d, d)."""
    vecs = random_complex(rng, (count, d))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    pure = np.einsum("ni,nj->nij", vecs, vecs.conj())
    g = random_complex(rng, (count, d, d))
    mixed = g @ np.conj(np.swapaxes(g, 1, 2))
    mixed /= np.trace(mixed, axis1=1, axis2=2).real[:, None, None]
    half = count // 2
    return np.concatenate([pure[:count - half], mixed[:half]])


def sample_hermitian(rng: np.random.Generator, d: int, count: int) -> np.ndarray:
    """Пачка гауссовых эрмитовых матриц с нормой Фробениуса 1."""
    g = random_complex(rng, (count, d, d))
    h = (g + np.conj(np.swapaxes(g, 1, 2))) / 2
    return h / np.linalg.norm(h, axis=(1, 2))[:, None, None]


def random_space(rng: np.random.Generator, m: int, *, uniform: bool = True) -> FiniteMeasureSpace:
    if uniform:
        return FiniteMeasureSpace.uniform(m, 1.0 / m)
    return FiniteMeasureSpace.from_masses(rng.uniform(0.2, 1.0, m))


def random_povm(rng: np.random.Generator, space: FiniteMeasureSpace, d: int, *,
                normalized: bool = False, rank: int | None = None) -> Povm:
    effects = np.stack([random_psd(rng, d, rank) for _ in range(space.size)])
    if normalized:
        total = effects.sum(axis=0)
        w, v = np.linalg.eigh(total)
        inv_root = (v / np.sqrt(w)) @ v.conj().T
        effects = np.einsum("ij,xjk,kl->xil", inv_root, effects, inv_root)
    return Povm(space, effects)


def random_qrv(rng: np.random.Generator, space: FiniteMeasureSpace, d: int, *,
               self_adjoint: bool = False, positive: bool = False, real: bool = False) -> QuantumRandomVariable:
    if positive:
        values = np.stack([random_psd(rng, d) for _ in range(space.size)])
    elif self_adjoint:
        values = np.stack([random_hermitian(rng, d, real=real) for _ in range(space.size)])
    else:
        values = random_complex(rng, (space.size, d, d))
    return QuantumRandomVariable(space, values)


def random_scalar(rng: np.random.Generator, space: FiniteMeasureSpace, *, real: bool = True) -> ClassicalFunction:
    vals = rng.standard_normal(space.size)
    if not real:
        vals = vals + 1j * rng.standard_normal(space.size)
    return ClassicalFunction(space, vals)


def random_bistochastic(rng: np.random.Generator, space: FiniteMeasureSpace, terms: int = 10) -> BistochasticMatrix:
    """Случайная выпуклая комбинация перестановок, сохраняющих массы."""
    m = space.size
    classes: dict[float, list[int]] = {}
    for i, mass in enumerate(space.masses):
        classes.setdefault(round(float(mass), 12), []).append(i)
    weights = rng.dirichlet(np.ones(terms))
    b = np.zeros((m, m))
    for w in weights:
        perm = np.arange(m)
        for members in classes.values():
            perm[members] = rng.permutation(members)
        b += w * np.eye(m)[perm]
    return BistochasticMatrix(space, b)


# --- усечения бесконечномерных примеров ---

@dataclass(frozen=True, eq=False)
class TruncationDemo:
    depth: int
    povm: Povm
    f: QuantumRandomVariable
    multiplier: np.ndarray | None = None


def dyadic_truncation(depth: int) -> TruncationDemo:
    """
    Атомы n = 1..k с μ(n) = 2^{-n}, ν = μI_k, f(n) = 2^n e_{nn}:
    ∫f dν = I_k, тогда как ‖∫‖f(x)‖I dν‖ = k.
    """
    masses = 2.0 ** -np.arange(1, depth + 1)
    space = FiniteMeasureSpace(tuple(str(n) for n in range(1, depth + 1)), masses)
    values = np.zeros((depth, depth, depth), dtype=np.complex128)
    for n in range(depth):
        values[n, n, n] = 2.0 ** (n + 1)
    return TruncationDemo(depth, Povm.scalar(space, depth), QuantumRandomVariable(space, values))


def swap_truncation(depth: int) -> TruncationDemo:
    """
    H = ℂ², атомы i = 1..k с μ(i) = 2^{-i}, ν(i) = diag(2^{-i}, 2^{-i/2}), f(i) = 2^{i/2} e₁₁.
    ‖f‖₁ = Σ 2^{-i/2} ограничена, а ‖U*fU‖₁ = k для перестановки U базисных векторов.
    """
    idx = np.arange(1, depth + 1, dtype=float)
    space = FiniteMeasureSpace(tuple(str(int(i)) for i in idx), 2.0 ** -idx)
    effects = np.zeros((depth, 2, 2), dtype=np.complex128)
    effects[:, 0, 0] = 2.0 ** -idx
    effects[:, 1, 1] = 2.0 ** (-idx / 2)
    values = np.zeros((depth, 2, 2), dtype=np.complex128)
    values[:, 0, 0] = 2.0 ** (idx / 2)
    return TruncationDemo(depth, Povm(space, effects), QuantumRandomVariable(space, values), SWAP)


def bounded_truncation(f: QuantumRandomVariable, level: float) -> QuantumRandomVariable:
    """χ_E f, E = {x : ‖f(x)‖ ≤ level}."""
    return f.restrict(f.pointwise_norms() <= level)
