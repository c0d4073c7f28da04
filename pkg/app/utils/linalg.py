"""
Плотные ядра для комплексных и эрмитовых матриц.

Все функции принимают numpy-массивы (или объекты с ``__array__``, например
ComplexOperator) и возвращают numpy-массивы. Допуски по умолчанию берутся из
настроек (``settings.psd_tol``).
"""
from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike

from app.core.config import settings
from app.core.errors import DimMismatch, MatrixNotPsd, NonFiniteEntries, NotHermitian, QrvError

# Относительный допуск на эрмитовость входа
HERMITIAN_TOL = 1e-9
JACOBI_MAX_SWEEPS = 100


def as_matrix(a: ArrayLike) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"Ожидается квадратная матрица, получено {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteEntries("Матрица содержит NaN или Inf")
    return m


def hermitize(a: ArrayLike) -> np.ndarray:
    """Точная эрмитова симметрия: верхний треугольник зеркалится вниз."""
    m = as_matrix(a)
    upper = np.triu(m, 1)
    out = upper + upper.conj().T
    out[np.diag_indices_from(out)] = m.diagonal().real
    return out


def is_hermitian(a: ArrayLike, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(a)
    scale = 1.0 + float(np.max(np.abs(m), initial=0.0))
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * scale)


def as_hermitian(a: ArrayLike, tol: float = HERMITIAN_TOL) -> np.ndarray:
    if not is_hermitian(a, tol):
        raise NotHermitian("Матрица не является эрмитовой")
    return hermitize(a)


def jacobi_eigh(a: ArrayLike, tol: float = 1e-15) -> tuple[np.ndarray, np.ndarray]:
    """Циклический метод Якоби для эрмитовой матрицы (комплексные вращения)."""
    m = hermitize(a)
    n = m.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(float(np.linalg.norm(m)), 1e-300)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(max(float(np.linalg.norm(m) ** 2 - np.sum(np.abs(m.diagonal()) ** 2)), 0.0))
        if off <= tol * scale:
            return m.diagonal().real.copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                beta = abs(apq)
                if beta <= 1e-300:
                    continue
                phase = apq / beta
                theta = 0.5 * math.atan2(2.0 * beta, m[p, p].real - m[q, q].real)
                c, s = math.cos(theta), math.sin(theta)
                # W = diag(1, conj(phase)) @ [[c, -s], [s, c]]
                w = np.array([[c, -s], [np.conj(phase) * s, np.conj(phase) * c]], dtype=np.complex128)
                idx = [p, q]
                m[:, idx] = m[:, idx] @ w
                m[idx, :] = w.conj().T @ m[idx, :]
                v[:, idx] = v[:, idx] @ w
                m[p, q] = m[q, p] = 0.0
                m[p, p] = m[p, p].real
                m[q, q] = m[q, q].real
    raise QrvError("Метод Якоби не сошелся за отведенное число проходов")


def hermitian_eigen(a: ArrayLike, method: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Собственные значения по убыванию и ортонормированные собственные векторы (столбцы)."""
    m = as_hermitian(a)
    method = method or settings.eigensolver
    if method == "jacobi":
        w, v = jacobi_eigh(m)
    else:
        w, v = np.linalg.eigh(m)
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], v[:, order]


def operator_norm(a: ArrayLike) -> float:
    m = as_matrix(a)
    if m.size == 0:
        return 0.0
    if is_hermitian(m, 0.0):
        return float(np.max(np.abs(np.linalg.eigvalsh(m)), initial=0.0))
    return float(np.linalg.norm(m, 2))


def trace_norm(a: ArrayLike) -> float:
    m = as_matrix(a)
    if is_hermitian(m, 0.0):
        return float(np.sum(np.abs(np.linalg.eigvalsh(m))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def lambda_min(a: ArrayLike) -> float:
    return float(np.linalg.eigvalsh(as_hermitian(a))[0])


def positive_parts(a: ArrayLike) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(A₊, A₋, |A|) для эрмитовой A."""
    w, v = hermitian_eigen(a)
    plus = hermitize((v * np.maximum(w, 0.0)) @ v.conj().T)
    minus = hermitize((v * np.maximum(-w, 0.0)) @ v.conj().T)
    return plus, minus, plus + minus


def modulus(a: ArrayLike) -> np.ndarray:
    """|A| = (A*A)^{1/2}; для эрмитовой A совпадает с A₊ + A₋."""
    m = as_matrix(a)
    return psd_sqrt(hermitize(m.conj().T @ m))


def is_psd(a: ArrayLike, tol: float | None = None) -> bool:
    tol = settings.psd_tol if tol is None else tol
    w = np.linalg.eigvalsh(as_hermitian(a))
    if w.size == 0:
        return True
    return bool(w[0] >= -tol * (1.0 + float(np.max(np.abs(w)))))


def psd_sqrt(a: ArrayLike, tol: float | None = None) -> np.ndarray:
    tol = settings.psd_tol if tol is None else tol
    w, v = hermitian_eigen(a)
    scale = 1.0 + float(np.max(np.abs(w), initial=0.0))
    if w.size and w[-1] < -tol * scale:
        raise MatrixNotPsd(f"Матрица не положительна: λ_min = {w[-1]:.3e}")
    # значения из [-tol·(1+‖A‖), 0) считаются нулем
    root = np.sqrt(np.clip(w, 0.0, None))
    return hermitize((v * root) @ v.conj().T)


def psd_inverse_sqrt(a: ArrayLike, tol: float | None = None) -> np.ndarray:
    """A^{-1/2} для положительно определенной A; MatrixNotPsd, если A вырождена."""
    tol = settings.psd_tol if tol is None else tol
    w, v = hermitian_eigen(a)
    scale = 1.0 + float(np.max(np.abs(w), initial=0.0))
    if w.size and w[-1] <= tol * scale:
        raise MatrixNotPsd("Матрица вырождена или не положительна")
    return hermitize((v / np.sqrt(w)) @ v.conj().T)


def trace_pairing(t: ArrayLike, a: ArrayLike) -> complex:
    tm, am = as_matrix(t), as_matrix(a)
    if tm.shape != am.shape:
        raise DimMismatch(f"Размерности не совпадают: {tm.shape} и {am.shape}")
    return complex(np.einsum("ij,ji->", tm, am))


def real_part(a: ArrayLike) -> np.ndarray:
    """Эрмитова часть (A + A*)/2."""
    m = as_matrix(a)
    return hermitize((m + m.conj().T) / 2)


def imag_part(a: ArrayLike) -> np.ndarray:
    """Антиэрмитова часть как эрмитова матрица: (A − A*)/(2i)."""
    m = as_matrix(a)
    return hermitize((m - m.conj().T) / 2j)


# --- вещественная параметризация эрмитовых матриц ---

def herm_dim(d: int) -> int:
    return d * d


def _upper(d: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(d, 1)


def herm_to_params(h: ArrayLike) -> np.ndarray:
    """[H_ii, Re H_ij (i<j), Im H_ij (i<j)]: d² вещественных координат."""
    m = np.asarray(h, dtype=np.complex128)
    iu = _upper(m.shape[-1])
    return np.concatenate([m.diagonal().real, m[iu].real, m[iu].imag])


def params_to_herm(v: ArrayLike, d: int) -> np.ndarray:
    vec = np.asarray(v, dtype=float)
    iu = _upper(d)
    k = len(iu[0])
    out = np.zeros((d, d), dtype=np.complex128)
    out[np.diag_indices(d)] = vec[:d]
    out[iu] = vec[d:d + k] + 1j * vec[d + k:d + 2 * k]
    out[(iu[1], iu[0])] = np.conj(out[iu])
    return out


def dual_params_to_herm(y: ArrayLike, d: int) -> np.ndarray:
    """Матрица t с tr(tH) = ⟨y, herm_to_params(H)⟩ для всех эрмитовых H."""
    vec = np.asarray(y, dtype=float).copy()
    vec[d:] = vec[d:] / 2
    return params_to_herm(vec, d)


def hermitian_basis(d: int) -> np.ndarray:
    """Базис эрмитовых матриц, согласованный с params_to_herm: H = Σ vᵢ Bᵢ."""
    n = herm_dim(d)
    return np.stack([params_to_herm(np.eye(n)[i], d) for i in range(n)])


def embed_real(h: ArrayLike) -> np.ndarray:
    """Вещественное вложение [[Re, −Im], [Im, Re]] размера 2d×2d."""
    m = np.asarray(h, dtype=np.complex128)
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def unembed_dual(y: ArrayLike) -> np.ndarray:
    """Эрмитова Z с tr(Z H) = tr(Y · embed_real(H)); Y ⪰ 0 влечет Z ⪰ 0."""
    ym = np.asarray(y, dtype=float)
    d = ym.shape[0] // 2
    y11, y12, y21, y22 = ym[:d, :d], ym[:d, d:], ym[d:, :d], ym[d:, d:]
    return hermitize((y11 + y22) + 1j * (y21 - y12))


def project_to_state(z: ArrayLike) -> np.ndarray:
    """Ближайшее (по спектру) состояние: отрицательная часть отбрасывается, след = 1."""
    plus, _, _ = positive_parts(z)
    tr = float(np.trace(plus).real)
    if tr <= 0:
        d = plus.shape[0]
        return np.eye(d, dtype=np.complex128) / d
    return plus / tr
