"""Плотные комплексные ядра: эрмитово EVD, SVD, ДПФ и одноуровневое ортонормированное DWT."""

import numpy as np
import pywt
from scipy import linalg

from .exceptions import ContractError
from .models import ComplexArray, EvdResult, SvdResult, WaveletFamily


def _as_matrix(matrix, operation: str) -> ComplexArray:
    array = np.asarray(matrix, dtype=complex)
    if array.ndim != 2 or 0 in array.shape:
        raise ContractError(operation, f"ожидается непустая матрица, получена форма {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ContractError(operation, "матрица содержит нечисловые значения")
    return array


def phase_normalize(vectors: ComplexArray) -> ComplexArray:
    """Поворачивает каждый столбец так, чтобы его наибольший по модулю элемент был вещественным > 0."""
    vectors = np.array(vectors, dtype=complex)
    pivots = np.argmax(np.abs(vectors), axis=0)
    anchors = vectors[pivots, np.arange(vectors.shape[1])]
    magnitudes = np.abs(anchors)
    phases = np.ones_like(anchors)
    nonzero = magnitudes > 0
    phases[nonzero] = np.conj(anchors[nonzero]) / magnitudes[nonzero]
    return vectors * phases[np.newaxis, :]


def hermitian_evd(matrix) -> EvdResult:
    """Спектральное разложение эрмитовой матрицы, собственные значения по убыванию."""
    m = _as_matrix(matrix, "hermitian_evd")
    if m.shape[0] != m.shape[1]:
        raise ContractError("hermitian_evd", f"матрица не квадратная: {m.shape}")
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.conj().T) > 1e-8 * scale:
        raise ContractError("hermitian_evd", "матрица не эрмитова")

    eigenvalues, eigenvectors = linalg.eigh(m)
    # eigh возвращает значения по возрастанию
    order = np.arange(eigenvalues.size)[::-1]
    return EvdResult(
        eigenvalues=np.ascontiguousarray(eigenvalues[order]),
        eigenvectors=phase_normalize(eigenvectors[:, order]),
    )


def svd(matrix) -> SvdResult:
    """Полное SVD; сингулярные числа по убыванию."""
    m = _as_matrix(matrix, "svd")
    u, s, vh = linalg.svd(m, full_matrices=True)
    return SvdResult(left_vectors=u, singular_values=s, right_vectors=vh.conj().T)


def dft(x) -> ComplexArray:
    """X[k] = Σ x[n]·exp(−j2πkn/L)."""
    x = np.asarray(x, dtype=complex)
    if x.size < 1:
        raise ContractError("dft", "пустой вектор")
    return np.fft.fft(x, axis=-1)


def idft(spectrum) -> ComplexArray:
    spectrum = np.asarray(spectrum, dtype=complex)
    if spectrum.size < 1:
        raise ContractError("idft", "пустой вектор")
    return np.fft.ifft(spectrum, axis=-1)


def dwt_level1(x, wavelet: WaveletFamily = WaveletFamily.HAAR) -> tuple[np.ndarray, np.ndarray]:
    """Одноуровневое ортонормированное DWT.

    Для Haar: approx[i] = (x[2i] + x[2i+1])/√2, detail[i] = (x[2i] − x[2i+1])/√2.
    Комплексный вход обрабатывается по вещественной и мнимой частям.
    """
    x = np.asarray(x)
    if x.ndim != 1 or x.size == 0 or x.size % 2:
        raise ContractError("dwt_level1", f"нужна чётная длина, получено {x.size}")
    name = WaveletFamily(wavelet).value
    if np.iscomplexobj(x):
        re_a, re_d = pywt.dwt(x.real, name, mode="periodization")
        im_a, im_d = pywt.dwt(x.imag, name, mode="periodization")
        return re_a + 1j * im_a, re_d + 1j * im_d
    approx, detail = pywt.dwt(x.astype(float), name, mode="periodization")
    return approx, detail


def idwt_level1(approx, detail, wavelet: WaveletFamily = WaveletFamily.HAAR) -> np.ndarray:
    approx = np.asarray(approx)
    detail = np.asarray(detail)
    if approx.shape != detail.shape or approx.ndim != 1:
        raise ContractError("idwt_level1", "коэффициенты должны быть векторами одной длины")
    name = WaveletFamily(wavelet).value
    if np.iscomplexobj(approx) or np.iscomplexobj(detail):
        real = pywt.idwt(approx.real, detail.real, name, mode="periodization")
        imag = pywt.idwt(approx.imag, detail.imag, name, mode="periodization")
        return real + 1j * imag
    return pywt.idwt(approx.astype(float), detail.astype(float), name, mode="periodization")
