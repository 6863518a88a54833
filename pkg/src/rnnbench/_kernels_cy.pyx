# cython: boundscheck=False, wraparound=False, initializedcheck=False
# cython: language_level=3
"""Compiled sequence and optimizer kernels.

Line-for-line twin of rnnbench._kernels_py: the same floating-point
operations in the same order, so results are bit-identical across the
two backends (the build passes -ffp-contract=off to keep the compiler
from fusing multiply-adds).  When editing one backend, mirror the
change in the other.  See _kernels_py for the buffer layout contract.
"""

from array import array

from libc.math cimport exp, isfinite, sqrt, tanh


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double t
    if x >= 0.0:
        t = exp(-x)
        return 1.0 / (1.0 + t)
    t = exp(x)
    return t / (1.0 + t)


cdef double[::1] _scratch(Py_ssize_t n, list keep):
    buf = array("d", bytes(8 * n))
    keep.append(buf)
    return buf


def lstm_forward(double[::1] wi, double[::1] wf, double[::1] wo, double[::1] wc,
                 double[::1] bi, double[::1] bf, double[::1] bo, double[::1] bc,
                 double[::1] wout, double bout,
                 double[::1] xs, Py_ssize_t T, Py_ssize_t D, Py_ssize_t H,
                 double[::1] cz, double[::1] ci, double[::1] cf, double[::1] co,
                 double[::1] cg, double[::1] cc, double[::1] ctc, double[::1] ch):
    cdef Py_ssize_t K = H + D
    cdef Py_ssize_t t, j, d, k, zoff, hoff, poff, row
    cdef double si, sf, so, sg, zk, iv, fv, ov, gv, cprev, cv, tc, s
    for t in range(T):
        zoff = t * K
        hoff = t * H
        poff = hoff - H
        if t > 0:
            for j in range(H):
                cz[zoff + j] = ch[poff + j]
        else:
            for j in range(H):
                cz[zoff + j] = 0.0
        for d in range(D):
            cz[zoff + H + d] = xs[t * D + d]
        for j in range(H):
            row = j * K
            si = 0.0
            sf = 0.0
            so = 0.0
            sg = 0.0
            for k in range(K):
                zk = cz[zoff + k]
                si += wi[row + k] * zk
                sf += wf[row + k] * zk
                so += wo[row + k] * zk
                sg += wc[row + k] * zk
            si += bi[j]
            sf += bf[j]
            so += bo[j]
            sg += bc[j]
            iv = _sigmoid(si)
            fv = _sigmoid(sf)
            ov = _sigmoid(so)
            gv = tanh(sg)
            cprev = cc[poff + j] if t > 0 else 0.0
            cv = fv * cprev + iv * gv
            tc = tanh(cv)
            ci[hoff + j] = iv
            cf[hoff + j] = fv
            co[hoff + j] = ov
            cg[hoff + j] = gv
            cc[hoff + j] = cv
            ctc[hoff + j] = tc
            ch[hoff + j] = ov * tc
    s = 0.0
    hoff = (T - 1) * H
    for j in range(H):
        s += wout[j] * ch[hoff + j]
    s += bout
    return s


def lstm_backward(double[::1] wi, double[::1] wf, double[::1] wo, double[::1] wc,
                  double[::1] wout, Py_ssize_t T, Py_ssize_t D, Py_ssize_t H,
                  double[::1] cz, double[::1] ci, double[::1] cf, double[::1] co,
                  double[::1] cg, double[::1] cc, double[::1] ctc, double[::1] ch,
                  double dpred,
                  double[::1] dwi, double[::1] dwf, double[::1] dwo, double[::1] dwc,
                  double[::1] dbi, double[::1] dbf, double[::1] dbo, double[::1] dbc,
                  double[::1] dwout, double[::1] dbout):
    cdef Py_ssize_t K = H + D
    cdef Py_ssize_t t, j, k, idx, zoff, hoff, poff, row
    cdef double iv, fv, ov, gv, tc, dhj, doj, dcj, cprev, a, b, c, d, zk
    cdef list keep = []
    cdef double[::1] dh = _scratch(H, keep)
    cdef double[::1] dc = _scratch(H, keep)
    cdef double[::1] dpi = _scratch(H, keep)
    cdef double[::1] dpf = _scratch(H, keep)
    cdef double[::1] dpo = _scratch(H, keep)
    cdef double[::1] dpg = _scratch(H, keep)
    cdef double[::1] dhprev = _scratch(H, keep)
    cdef double[::1] tmp
    for idx in range(H * K):
        dwi[idx] = 0.0
        dwf[idx] = 0.0
        dwo[idx] = 0.0
        dwc[idx] = 0.0
    for j in range(H):
        dbi[j] = 0.0
        dbf[j] = 0.0
        dbo[j] = 0.0
        dbc[j] = 0.0
    dbout[0] = dpred
    hoff = (T - 1) * H
    for j in range(H):
        dwout[j] = dpred * ch[hoff + j]
        dh[j] = dpred * wout[j]
        dc[j] = 0.0
    for t in range(T - 1, -1, -1):
        zoff = t * K
        hoff = t * H
        poff = hoff - H
        for j in range(H):
            iv = ci[hoff + j]
            fv = cf[hoff + j]
            ov = co[hoff + j]
            gv = cg[hoff + j]
            tc = ctc[hoff + j]
            dhj = dh[j]
            doj = dhj * tc
            dcj = dc[j] + dhj * ov * (1.0 - tc * tc)
            cprev = cc[poff + j] if t > 0 else 0.0
            dpi[j] = dcj * gv * iv * (1.0 - iv)
            dpf[j] = dcj * cprev * fv * (1.0 - fv)
            dpo[j] = doj * ov * (1.0 - ov)
            dpg[j] = dcj * iv * (1.0 - gv * gv)
            dc[j] = dcj * fv
            dhprev[j] = 0.0
        for j in range(H):
            row = j * K
            a = dpi[j]
            b = dpf[j]
            c = dpo[j]
            d = dpg[j]
            dbi[j] += a
            dbf[j] += b
            dbo[j] += c
            dbc[j] += d
            for k in range(K):
                zk = cz[zoff + k]
                dwi[row + k] += a * zk
                dwf[row + k] += b * zk
                dwo[row + k] += c * zk
                dwc[row + k] += d * zk
            for k in range(H):
                dhprev[k] += wi[row + k] * a + wf[row + k] * b \
                    + wo[row + k] * c + wc[row + k] * d
        tmp = dh
        dh = dhprev
        dhprev = tmp


def gru_forward(double[::1] wz, double[::1] wr, double[::1] wh,
                double[::1] bz, double[::1] br, double[::1] bh,
                double[::1] wout, double bout,
                double[::1] xs, Py_ssize_t T, Py_ssize_t D, Py_ssize_t H,
                double[::1] czin, double[::1] ccin, double[::1] czg,
                double[::1] crg, double[::1] chc, double[::1] ch):
    cdef Py_ssize_t K = H + D
    cdef Py_ssize_t t, j, d, k, zoff, hoff, poff, row
    cdef double sz, sr, sc, vk, hc, zv, s
    for t in range(T):
        zoff = t * K
        hoff = t * H
        poff = hoff - H
        if t > 0:
            for j in range(H):
                czin[zoff + j] = ch[poff + j]
        else:
            for j in range(H):
                czin[zoff + j] = 0.0
        for d in range(D):
            czin[zoff + H + d] = xs[t * D + d]
        for j in range(H):
            row = j * K
            sz = 0.0
            sr = 0.0
            for k in range(K):
                vk = czin[zoff + k]
                sz += wz[row + k] * vk
                sr += wr[row + k] * vk
            sz += bz[j]
            sr += br[j]
            czg[hoff + j] = _sigmoid(sz)
            crg[hoff + j] = _sigmoid(sr)
        for j in range(H):
            ccin[zoff + j] = crg[hoff + j] * czin[zoff + j]
        for d in range(D):
            ccin[zoff + H + d] = xs[t * D + d]
        for j in range(H):
            row = j * K
            sc = 0.0
            for k in range(K):
                sc += wh[row + k] * ccin[zoff + k]
            sc += bh[j]
            hc = tanh(sc)
            chc[hoff + j] = hc
            zv = czg[hoff + j]
            ch[hoff + j] = (1.0 - zv) * czin[zoff + j] + zv * hc
    s = 0.0
    hoff = (T - 1) * H
    for j in range(H):
        s += wout[j] * ch[hoff + j]
    s += bout
    return s


def gru_backward(double[::1] wz, double[::1] wr, double[::1] wh,
                 double[::1] wout, Py_ssize_t T, Py_ssize_t D, Py_ssize_t H,
                 double[::1] czin, double[::1] ccin, double[::1] czg,
                 double[::1] crg, double[::1] chc, double[::1] ch,
                 double dpred,
                 double[::1] dwz, double[::1] dwr, double[::1] dwh,
                 double[::1] dbz, double[::1] dbr, double[::1] dbh,
                 double[::1] dwout, double[::1] dbout):
    cdef Py_ssize_t K = H + D
    cdef Py_ssize_t t, j, k, idx, zoff, hoff, row
    cdef double zv, hc, hp, dhj, rv, a, b, d, vk
    cdef list keep = []
    cdef double[::1] dh = _scratch(H, keep)
    cdef double[::1] dpz = _scratch(H, keep)
    cdef double[::1] dpr = _scratch(H, keep)
    cdef double[::1] dpc = _scratch(H, keep)
    cdef double[::1] dcin = _scratch(H, keep)
    cdef double[::1] dhprev = _scratch(H, keep)
    cdef double[::1] tmp
    for idx in range(H * K):
        dwz[idx] = 0.0
        dwr[idx] = 0.0
        dwh[idx] = 0.0
    for j in range(H):
        dbz[j] = 0.0
        dbr[j] = 0.0
        dbh[j] = 0.0
    dbout[0] = dpred
    hoff = (T - 1) * H
    for j in range(H):
        dwout[j] = dpred * ch[hoff + j]
        dh[j] = dpred * wout[j]
    for t in range(T - 1, -1, -1):
        zoff = t * K
        hoff = t * H
        for j in range(H):
            zv = czg[hoff + j]
            hc = chc[hoff + j]
            hp = czin[zoff + j]
            dhj = dh[j]
            dpc[j] = dhj * zv * (1.0 - hc * hc)
            dpz[j] = dhj * (hc - hp) * zv * (1.0 - zv)
            dhprev[j] = dhj * (1.0 - zv)
            dcin[j] = 0.0
        for j in range(H):
            row = j * K
            d = dpc[j]
            dbh[j] += d
            for k in range(K):
                dwh[row + k] += d * ccin[zoff + k]
            for k in range(H):
                dcin[k] += wh[row + k] * d
        for j in range(H):
            rv = crg[hoff + j]
            dpr[j] = dcin[j] * czin[zoff + j] * rv * (1.0 - rv)
            dhprev[j] += dcin[j] * rv
        for j in range(H):
            row = j * K
            a = dpz[j]
            b = dpr[j]
            dbz[j] += a
            dbr[j] += b
            for k in range(K):
                vk = czin[zoff + k]
                dwz[row + k] += a * vk
                dwr[row + k] += b * vk
            for k in range(H):
                dhprev[k] += wz[row + k] * a + wr[row + k] * b
        tmp = dh
        dh = dhprev
        dhprev = tmp


def velocity_update(double[::1] v, double[::1] g, double beta, double lr):
    """v <- beta*v + lr*g, elementwise in place."""
    cdef Py_ssize_t idx
    for idx in range(v.shape[0]):
        v[idx] = beta * v[idx] + lr * g[idx]


def sub_inplace(double[::1] p, double[::1] v):
    """p <- p - v, elementwise in place."""
    cdef Py_ssize_t idx
    for idx in range(p.shape[0]):
        p[idx] = p[idx] - v[idx]


def assign_diff(double[::1] p, double[::1] a, double[::1] b):
    """p <- a - b, elementwise."""
    cdef Py_ssize_t idx
    for idx in range(p.shape[0]):
        p[idx] = a[idx] - b[idx]


def lookahead(double[::1] out, double[::1] p, double[::1] v, double beta):
    """out <- p - beta*v, elementwise."""
    cdef Py_ssize_t idx
    for idx in range(out.shape[0]):
        out[idx] = p[idx] - beta * v[idx]


def adam_update(double[::1] p, double[::1] m, double[::1] v, double[::1] g,
                double beta1, double beta2, double lr, double eps,
                double bc1, double bc2):
    """One Adam step on a block; bc1/bc2 are 1-beta1^t and 1-beta2^t."""
    cdef Py_ssize_t idx
    cdef double gi, mi, vi
    for idx in range(p.shape[0]):
        gi = g[idx]
        mi = beta1 * m[idx] + (1.0 - beta1) * gi
        vi = beta2 * v[idx] + (1.0 - beta2) * (gi * gi)
        m[idx] = mi
        v[idx] = vi
        p[idx] = p[idx] - lr * (mi / bc1) / (sqrt(vi / bc2) + eps)


def all_finite(double[::1] x):
    cdef Py_ssize_t idx
    for idx in range(x.shape[0]):
        if not isfinite(x[idx]):
            return False
    return True
