"""Pure-Python sequence and optimizer kernels (reference backend).

These are the hot inner loops: unrolled LSTM/GRU forward passes over a
lookback window, the matching reverse-mode sweeps, and per-block
optimizer updates.  rnnbench._kernels_cy compiles the same loops with
Cython; both backends must execute the *same floating-point operations
in the same order* so that results are bit-identical.  When editing one
backend, mirror the change in the other.

All buffers are flat float64 ``array('d')`` (or any double buffer for
the compiled backend), row-major.  Layout for a window of T steps with
input size D and hidden size H (K = H + D):

  xs   T*D   inputs, step-major
  z    T*K   concatenated [h_{t-1}, x_t] per step (h first)
  i/f/o, zg/rg  T*H  gate activations
  g/hc T*H   candidate activations (tanh)
  c    T*H   LSTM cell state
  tc   T*H   tanh(c_t), cached for the backward pass
  h    T*H   hidden state
  cin  T*K   GRU candidate input [r_t*h_{t-1}, x_t]

Hidden and cell state start at zero for every window.
"""

from __future__ import annotations

from math import exp, isfinite, sqrt, tanh


def _sigmoid(x: float) -> float:
    # Stable form; mirrors linalg.sigmoid_scalar and the Cython kernel.
    if x >= 0.0:
        t = exp(-x)
        return 1.0 / (1.0 + t)
    t = exp(x)
    return t / (1.0 + t)


def lstm_forward(wi, wf, wo, wc, bi, bf, bo, bc, wout, bout,
                 xs, T, D, H, cz, ci, cf, co, cg, cc, ctc, ch):
    """Run T LSTM steps, filling the caches; returns the scalar prediction."""
    K = H + D
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


def lstm_backward(wi, wf, wo, wc, wout, T, D, H,
                  cz, ci, cf, co, cg, cc, ctc, ch, dpred,
                  dwi, dwf, dwo, dwc, dbi, dbf, dbo, dbc, dwout, dbout):
    """Reverse-mode sweep matching lstm_forward; accumulates into the d* buffers.

    dpred is the adjoint of the prediction.  Output buffers are zeroed
    here, so callers may reuse them.
    """
    K = H + D
    for buf in (dwi, dwf, dwo, dwc):
        for idx in range(H * K):
            buf[idx] = 0.0
    for buf in (dbi, dbf, dbo, dbc):
        for j in range(H):
            buf[j] = 0.0
    dbout[0] = dpred
    hoff = (T - 1) * H
    dh = [0.0] * H
    for j in range(H):
        dwout[j] = dpred * ch[hoff + j]
        dh[j] = dpred * wout[j]
    dc = [0.0] * H
    dpi = [0.0] * H
    dpf = [0.0] * H
    dpo = [0.0] * H
    dpg = [0.0] * H
    dhprev = [0.0] * H
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
        dh, dhprev = dhprev, dh


def gru_forward(wz, wr, wh, bz, br, bh, wout, bout,
                xs, T, D, H, czin, ccin, czg, crg, chc, ch):
    """Run T GRU steps, filling the caches; returns the scalar prediction."""
    K = H + D
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


def gru_backward(wz, wr, wh, wout, T, D, H,
                 czin, ccin, czg, crg, chc, ch, dpred,
                 dwz, dwr, dwh, dbz, dbr, dbh, dwout, dbout):
    """Reverse-mode sweep matching gru_forward."""
    K = H + D
    for buf in (dwz, dwr, dwh):
        for idx in range(H * K):
            buf[idx] = 0.0
    for buf in (dbz, dbr, dbh):
        for j in range(H):
            buf[j] = 0.0
    dbout[0] = dpred
    hoff = (T - 1) * H
    dh = [0.0] * H
    for j in range(H):
        dwout[j] = dpred * ch[hoff + j]
        dh[j] = dpred * wout[j]
    dpz = [0.0] * H
    dpr = [0.0] * H
    dpc = [0.0] * H
    dcin = [0.0] * H
    dhprev = [0.0] * H
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
            # candidate input was [r*h_prev, x]: split the adjoint
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
        dh, dhprev = dhprev, dh


def velocity_update(v, g, beta, lr):
    """v <- beta*v + lr*g, elementwise in place."""
    for idx in range(len(v)):
        v[idx] = beta * v[idx] + lr * g[idx]


def sub_inplace(p, v):
    """p <- p - v, elementwise in place."""
    for idx in range(len(p)):
        p[idx] = p[idx] - v[idx]


def assign_diff(p, a, b):
    """p <- a - b, elementwise."""
    for idx in range(len(p)):
        p[idx] = a[idx] - b[idx]


def lookahead(out, p, v, beta):
    """out <- p - beta*v, elementwise."""
    for idx in range(len(out)):
        out[idx] = p[idx] - beta * v[idx]


def adam_update(p, m, v, g, beta1, beta2, lr, eps, bc1, bc2):
    """One Adam step on a block; bc1/bc2 are 1-beta1^t and 1-beta2^t."""
    for idx in range(len(p)):
        gi = g[idx]
        mi = beta1 * m[idx] + (1.0 - beta1) * gi
        vi = beta2 * v[idx] + (1.0 - beta2) * (gi * gi)
        m[idx] = mi
        v[idx] = vi
        p[idx] = p[idx] - lr * (mi / bc1) / (sqrt(vi / bc2) + eps)


def all_finite(x) -> bool:
    for val in x:
        if not isfinite(val):
            return False
    return True
