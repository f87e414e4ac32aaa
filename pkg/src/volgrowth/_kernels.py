"""Compiled single-orbit loops for perturbed toral maps.

numpy call overhead dominates when one orbit of a 2- or 3-dimensional map is
iterated a million times, so the QR recursion runs here instead.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _jacobian_into(J, A, K2pi, phase, outer, x):
    d = A.shape[0]
    for i in range(d):
        for j in range(d):
            J[i, j] = A[i, j]
    for m in range(K2pi.shape[0]):
        arg = phase[m]
        for i in range(d):
            arg += K2pi[m, i] * x[i]
        c = math.cos(arg)
        for i in range(d):
            for j in range(d):
                J[i, j] += c * outer[m, i, j]


@njit(cache=True)
def _step_into(y, A, K2pi, phase, ampT, x):
    d = A.shape[0]
    for i in range(d):
        s = 0.0
        for j in range(d):
            s += A[i, j] * x[j]
        y[i] = s
    for m in range(K2pi.shape[0]):
        arg = phase[m]
        for i in range(d):
            arg += K2pi[m, i] * x[i]
        s = math.sin(arg)
        for i in range(d):
            y[i] += s * ampT[m, i]
    for i in range(d):
        v = y[i] - math.floor(y[i])
        y[i] = 0.0 if v >= 1.0 else v


@njit(cache=True)
def _log_abs_det(J, work):
    d = J.shape[0]
    for i in range(d):
        for j in range(d):
            work[i, j] = J[i, j]
    total = 0.0
    for k in range(d):
        p = k
        for i in range(k + 1, d):
            if abs(work[i, k]) > abs(work[p, k]):
                p = i
        if work[p, k] == 0.0:
            return -np.inf
        if p != k:
            for j in range(d):
                t = work[k, j]
                work[k, j] = work[p, j]
                work[p, j] = t
        total += math.log(abs(work[k, k]))
        for i in range(k + 1, d):
            r = work[i, k] / work[k, k]
            for j in range(k, d):
                work[i, j] -= r * work[k, j]
    return total


@njit(cache=True)
def _mgs(W, Q, rdiag):
    """Modified Gram-Schmidt with one reorthogonalization pass; columns of W into Q."""
    d, k = W.shape
    for j in range(k):
        for i in range(d):
            Q[i, j] = W[i, j]
        r = 0.0
        for _ in range(2):
            for p in range(j):
                dot = 0.0
                for i in range(d):
                    dot += Q[i, p] * Q[i, j]
                for i in range(d):
                    Q[i, j] -= dot * Q[i, p]
        for i in range(d):
            r += Q[i, j] * Q[i, j]
        r = math.sqrt(r)
        rdiag[j] = r
        for i in range(d):
            Q[i, j] /= r


@njit(cache=True)
def lyapunov_orbit(A, K2pi, phase, ampT, outer, x0, Q0, n_settle, n):
    d = A.shape[0]
    x = x0.copy()
    y = np.empty(d)
    Q = Q0.copy()
    J = np.empty((d, d))
    W = np.empty((d, d))
    work = np.empty((d, d))
    rdiag = np.empty(d)
    sums = np.zeros(d)
    logdet = 0.0
    for step in range(n_settle + n):
        _jacobian_into(J, A, K2pi, phase, outer, x)
        for i in range(d):
            for j in range(d):
                s = 0.0
                for p in range(d):
                    s += J[i, p] * Q[p, j]
                W[i, j] = s
        _mgs(W, Q, rdiag)
        if step >= n_settle:
            for j in range(d):
                sums[j] += math.log(rdiag[j])
            logdet += _log_abs_det(J, work)
        _step_into(y, A, K2pi, phase, ampT, x)
        for i in range(d):
            x[i] = y[i]
    return sums / n, logdet / n
