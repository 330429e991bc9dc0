# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled elementwise kernels; same contract as _kernels_np.

Only elementwise loops live here. Matrix multiplies stay in numpy in both
backends so the two paths track each other to float64 round-off.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

BACKEND = "cython"


# numpy's SIMD exp/tanh outrun a scalar libm sweep (measured ~2x / ~10x),
# and there is nothing to fuse in a lone nonlinearity, so these two stay on
# the numpy ufuncs in both backends.
def sigmoid_inplace(a):
    np.negative(a, out=a)
    np.exp(a, out=a)
    a += 1.0
    np.reciprocal(a, out=a)
    return a


def tanh_inplace(a):
    np.tanh(a, out=a)
    return a


def gru_combine(
    cnp.ndarray[cnp.float64_t, ndim=2] z,
    cnp.ndarray[cnp.float64_t, ndim=2] h_prev,
    cnp.ndarray[cnp.float64_t, ndim=2] hbar,
):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty_like(z)
    cdef double[:, ::1] vz = z, vh = h_prev, vb = hbar, vo = out
    cdef Py_ssize_t i, j
    for i in range(vz.shape[0]):
        for j in range(vz.shape[1]):
            vo[i, j] = (1.0 - vz[i, j]) * vh[i, j] + vz[i, j] * vb[i, j]
    return out


def gru_gate_grads(
    cnp.ndarray[cnp.float64_t, ndim=2] dh,
    cnp.ndarray[cnp.float64_t, ndim=2] z,
    cnp.ndarray[cnp.float64_t, ndim=2] hbar,
    cnp.ndarray[cnp.float64_t, ndim=2] h_prev,
):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dpre_z = np.empty_like(dh)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dpre_h = np.empty_like(dh)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dh_prev = np.empty_like(dh)
    cdef double[:, ::1] vdh = dh, vz = z, vb = hbar, vp = h_prev
    cdef double[:, ::1] oz = dpre_z, oh = dpre_h, op = dh_prev
    cdef Py_ssize_t i, j
    cdef double g, zz, bb
    for i in range(vdh.shape[0]):
        for j in range(vdh.shape[1]):
            g = vdh[i, j]
            zz = vz[i, j]
            bb = vb[i, j]
            oz[i, j] = g * (bb - vp[i, j]) * zz * (1.0 - zz)
            oh[i, j] = g * zz * (1.0 - bb * bb)
            op[i, j] = g * (1.0 - zz)
    return dpre_z, dpre_h, dh_prev


def r_gate_grads(
    cnp.ndarray[cnp.float64_t, ndim=2] drh,
    cnp.ndarray[cnp.float64_t, ndim=2] r,
    cnp.ndarray[cnp.float64_t, ndim=2] h_mat,
):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dpre_r = np.empty_like(drh)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dh_mat = np.empty_like(drh)
    cdef double[:, ::1] vd = drh, vr = r, vm = h_mat
    cdef double[:, ::1] orr = dpre_r, om = dh_mat
    cdef Py_ssize_t i, j
    cdef double d, rr
    for i in range(vd.shape[0]):
        for j in range(vd.shape[1]):
            d = vd[i, j]
            rr = vr[i, j]
            orr[i, j] = d * vm[i, j] * rr * (1.0 - rr)
            om[i, j] = d * rr
    return dpre_r, dh_mat


def softmax_xent(
    cnp.ndarray[cnp.float64_t, ndim=2] logits,
    cnp.ndarray[cnp.int64_t, ndim=1] targets,
    cnp.ndarray[cnp.float64_t, ndim=1] mask,
):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dlogits = np.empty_like(logits)
    cdef double[:, ::1] vl = logits, vd = dlogits
    cdef double[::1] vm = mask
    cdef long[::1] vt = targets
    cdef Py_ssize_t i, j, n = logits.shape[0], v = logits.shape[1]
    cdef double best, denom, loss = 0.0, m, p_target
    for i in range(n):
        best = vl[i, 0]
        for j in range(1, v):
            if vl[i, j] > best:
                best = vl[i, j]
        denom = 0.0
        for j in range(v):
            vd[i, j] = exp(vl[i, j] - best)
            denom += vd[i, j]
        m = vm[i]
        p_target = vd[i, vt[i]] / denom
        for j in range(v):
            vd[i, j] = vd[i, j] / denom * m
        vd[i, vt[i]] -= m
        if m != 0.0:
            loss -= log(p_target) * m
    return loss, dlogits
