# Compiled kernels: BLAS-backed dense layers plus fused SiLU/Adam loops.
# Mirrors _kernels_py.py function for function.

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, pow, sqrt
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef inline double _sigmoid(double x) nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


# Row-major matmuls are phrased as column-major dgemm on the transposed
# views (C = A.B  <=>  C^T = B^T.A^T), so no copies are made.


def linear_forward(double[:, ::1] x, double[:, ::1] w, double[::1] b):
    cdef int m = x.shape[0]
    cdef int k = x.shape[1]
    cdef int n = w.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] y = out
    cdef int i, j
    cdef double alpha = 1.0, beta = 1.0
    cdef char* no = b"n"
    with nogil:
        for i in range(m):
            for j in range(n):
                y[i, j] = b[j]
        dgemm(no, no, &n, &m, &k, &alpha, &w[0, 0], &n, &x[0, 0], &k, &beta, &y[0, 0], &n)
    return out


def linear_backward(double[:, ::1] x, double[:, ::1] w, double[:, ::1] gy, bint need_gx=True):
    cdef int m = x.shape[0]
    cdef int k = x.shape[1]
    cdef int n = w.shape[1]
    cdef cnp.ndarray[double, ndim=2] gw_arr = np.empty((k, n), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] gb_arr = np.zeros(n, dtype=np.float64)
    cdef double[:, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef cnp.ndarray[double, ndim=2] gx_arr = None
    cdef double[:, ::1] gx
    cdef int i, j
    cdef double alpha = 1.0, beta = 0.0
    cdef char* no = b"n"
    cdef char* tr = b"t"

    # gw = x^T . gy
    with nogil:
        dgemm(no, tr, &n, &k, &m, &alpha, &gy[0, 0], &n, &x[0, 0], &k, &beta, &gw[0, 0], &n)
        for i in range(m):
            for j in range(n):
                gb[j] += gy[i, j]
    if need_gx:
        gx_arr = np.empty((m, k), dtype=np.float64)
        gx = gx_arr
        # gx = gy . w^T
        with nogil:
            dgemm(tr, no, &k, &m, &n, &alpha, &w[0, 0], &n, &gy[0, 0], &n, &beta, &gx[0, 0], &k)
        return gx_arr, gw_arr, gb_arr
    return None, gw_arr, gb_arr


def silu_forward(object x):
    cdef cnp.ndarray arr = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray out = np.empty_like(arr)
    cdef double[::1] xv = arr.ravel()
    cdef double[::1] yv = out.ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    with nogil:
        for i in range(n):
            yv[i] = xv[i] * _sigmoid(xv[i])
    return out


def silu_backward(object x, object gy):
    cdef cnp.ndarray xarr = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray garr = np.ascontiguousarray(gy, dtype=np.float64)
    cdef cnp.ndarray out = np.empty_like(xarr)
    cdef double[::1] xv = xarr.ravel()
    cdef double[::1] gv = garr.ravel()
    cdef double[::1] yv = out.ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double s
    with nogil:
        for i in range(n):
            s = _sigmoid(xv[i])
            yv[i] = gv[i] * (s * (1.0 + xv[i] * (1.0 - s)))
    return out


def adam_update(object p, object g, object m, object v, long step,
                double lr, double beta1, double beta2, double eps):
    cdef double[::1] pv = np.asarray(p, dtype=np.float64).ravel()
    cdef double[::1] gv = np.ascontiguousarray(g, dtype=np.float64).ravel()
    cdef double[::1] mv = np.asarray(m, dtype=np.float64).ravel()
    cdef double[::1] vv = np.asarray(v, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = pv.shape[0]
    cdef double c1 = 1.0 - pow(beta1, <double> step)
    cdef double c2 = 1.0 - pow(beta2, <double> step)
    cdef double gi, mhat, vhat
    with nogil:
        for i in range(n):
            gi = gv[i]
            mv[i] = beta1 * mv[i] + (1.0 - beta1) * gi
            vv[i] = beta2 * vv[i] + (1.0 - beta2) * gi * gi
            mhat = mv[i] / c1
            vhat = vv[i] / c2
            pv[i] -= lr * mhat / (sqrt(vhat) + eps)
