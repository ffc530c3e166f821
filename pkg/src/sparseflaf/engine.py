"""Compiled per-trial kernels for the Monte Carlo harness.

These kernels replay the exact per-sample recursions of the streaming API
(expansion, filter updates, mixing updates) over a whole signal in one
call.  They exist purely for speed: ensemble experiments run thousands of
40k-sample trials.  Equivalence with the reference per-sample path is
pinned by tests; any change here must keep that test green.

All kernels release the GIL so trials can run on a thread pool.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def link_table(x, P):
    """Per-time-sample link values: row t holds sin/cos(p*pi*x[t]), p=1..P."""
    n = x.size
    out = np.empty((n, 2 * P))
    for t in range(n):
        for p in range(1, P + 1):
            arg = np.pi * (x[t] * p)
            out[t, 2 * p - 2] = np.sin(arg)
            out[t, 2 * p - 1] = np.cos(arg)
    return out


@njit(cache=True, nogil=True)
def _zero_links(P):
    # expansion of a zero pre-history sample: sines 0, cosines 1
    out = np.empty(2 * P)
    for p in range(1, P + 1):
        out[2 * p - 2] = 0.0
        out[2 * p - 1] = 1.0
    return out


@njit(cache=True, nogil=True)
def _clip(v, lim):
    return min(lim, max(-lim, v))


@njit(cache=True, nogil=True)
def run_combined(x, d, v, links, M, P, n_blocks,
                 mu_lin, delta_lin,
                 mu1, delta1, gamma, epsilon, beta, xi_vss,
                 mu2, delta2, alpha, xi_prop,
                 mu_c, beta_r, a_init, r_init):
    """Full combined scheme over one signal.

    Returns (squared excess error per sample, mixing-parameter trace of
    shape (N, n_blocks)).
    """
    N = x.size
    qf = 2 * P
    me = M * qf
    mb = qf // n_blocks
    zlinks = _zero_links(P)

    theta = 1.0 / (1.0 + np.exp(4.0))
    eta = 1.0 / (1.0 - 2.0 * theta)

    w_lin = np.zeros(M)
    w1 = np.zeros(me)
    w2 = np.zeros(me)
    pow_d = 0.0
    pow_yl = 0.0
    pow_y1 = 0.0
    pow_e1 = 0.0
    a = np.empty(n_blocks)
    lam = np.empty(n_blocks)
    r = np.empty(n_blocks)
    for l in range(n_blocks):
        a[l] = _clip(a_init, 4.0)
        lam[l] = min(1.0, max(0.0, eta * (1.0 / (1.0 + np.exp(-a[l])) - theta)))
        r[l] = r_init

    g = np.empty(me)
    q1 = np.empty(me)
    q2 = np.empty(me)
    p1 = np.empty(n_blocks)
    p2 = np.empty(n_blocks)
    sq = np.empty(N)
    lam_trace = np.empty((N, n_blocks))

    for n in range(N):
        # window energy, linear output, expanded vector (zero pre-history)
        y_l = 0.0
        xnorm = 0.0
        for i in range(M):
            t = n - i
            xt = x[t] if t >= 0 else 0.0
            y_l += w_lin[i] * xt
            xnorm += xt * xt
            base = i * qf
            if t >= 0:
                for k in range(qf):
                    g[base + k] = links[t, k]
            else:
                for k in range(qf):
                    g[base + k] = zlinks[k]

        # per-block partial outputs with pre-update weights
        for l in range(n_blocks):
            p1[l] = 0.0
            p2[l] = 0.0
        for i in range(M):
            row = i * qf
            for l in range(n_blocks):
                off = row + l * mb
                s1 = 0.0
                s2 = 0.0
                for k in range(mb):
                    s1 += g[off + k] * w1[off + k]
                    s2 += g[off + k] * w2[off + k]
                p1[l] += s1
                p2[l] += s2
        y1 = 0.0
        y2 = 0.0
        y_fl = 0.0
        for l in range(n_blocks):
            y1 += p1[l]
            y2 += p2[l]
            y_fl += lam[l] * p1[l] + (1.0 - lam[l]) * p2[l]
            lam_trace[n, l] = lam[l]

        e = d[n] - y_l - y_fl
        e1 = d[n] - y_l - y1
        e2 = d[n] - y_l - y2
        ex = e - v[n]
        sq[n] = ex * ex

        # l1 branch: powers, variable step size, proportionate + attractor
        pow_d = beta * pow_d + (1.0 - beta) * d[n] * d[n]
        pow_yl = beta * pow_yl + (1.0 - beta) * y_l * y_l
        pow_y1 = beta * pow_y1 + (1.0 - beta) * y1 * y1
        pow_e1 = beta * pow_e1 + (1.0 - beta) * e1 * e1
        mu_r = abs(1.0 - np.sqrt(abs(pow_d - pow_yl - pow_y1)) / (pow_e1 + xi_vss))
        gamma_r = epsilon * gamma * mu_r

        base_q = (1.0 - alpha) / (2.0 * me)
        norm1 = 0.0
        for k in range(me):
            norm1 += abs(w1[k])
        scale1 = (1.0 + alpha) / (2.0 * norm1 + xi_prop)
        den1 = delta1
        for k in range(me):
            q1[k] = base_q + scale1 * abs(w1[k])
            den1 += q1[k] * g[k] * g[k]
        coef1 = mu1 * e1 / den1
        for k in range(me):
            wk = w1[k]
            s = 1.0 if wk > 0.0 else (-1.0 if wk < 0.0 else 0.0)
            w1[k] = wk + coef1 * q1[k] * g[k] - gamma_r * s / (1.0 + epsilon * abs(wk))

        # proportionate branch
        norm2 = 0.0
        for k in range(me):
            norm2 += abs(w2[k])
        scale2 = (1.0 + alpha) / (2.0 * norm2 + xi_prop)
        den2 = delta2
        for k in range(me):
            q2[k] = base_q + scale2 * abs(w2[k])
            den2 += q2[k] * g[k] * g[k]
        coef2 = mu2 * e2 / den2
        for k in range(me):
            w2[k] += coef2 * q2[k] * g[k]

        # linear branch, driven by the overall error
        coef_l = mu_lin * e / (xnorm + delta_lin)
        for i in range(M):
            t = n - i
            if t >= 0:
                w_lin[i] += coef_l * x[t]

        # mixing parameters, normalized by the previous delta power
        for l in range(n_blocks):
            r_prev = r[l]
            dl = p1[l] - p2[l]
            if r_prev >= 1e-12:
                gain = (lam[l] + theta * eta) * (eta - theta * eta - lam[l])
                a[l] = _clip(a[l] + mu_c / (eta * r_prev) * e * dl * gain, 4.0)
                lam[l] = min(1.0, max(0.0, eta * (1.0 / (1.0 + np.exp(-a[l])) - theta)))
            r[l] = beta_r * r_prev + (1.0 - beta_r) * dl * dl

    return sq, lam_trace


@njit(cache=True, nogil=True)
def run_single(x, d, v, links, M, P,
               mu_lin, delta_lin,
               mu, delta, alpha, xi_prop,
               use_attractor, gamma, epsilon, beta, xi_vss):
    """Linear branch plus one expanded-domain filter.

    ``use_attractor`` selects the l1 branch (variable-step-size reweighted
    zero attractor); otherwise the filter is plain proportionate.  With a
    single nonlinear filter the branch error equals the overall error.
    """
    N = x.size
    qf = 2 * P
    me = M * qf
    zlinks = _zero_links(P)

    w_lin = np.zeros(M)
    w = np.zeros(me)
    pow_d = 0.0
    pow_yl = 0.0
    pow_y = 0.0
    pow_e = 0.0

    g = np.empty(me)
    q = np.empty(me)
    sq = np.empty(N)

    for n in range(N):
        y_l = 0.0
        xnorm = 0.0
        for i in range(M):
            t = n - i
            xt = x[t] if t >= 0 else 0.0
            y_l += w_lin[i] * xt
            xnorm += xt * xt
            base = i * qf
            if t >= 0:
                for k in range(qf):
                    g[base + k] = links[t, k]
            else:
                for k in range(qf):
                    g[base + k] = zlinks[k]

        y_nl = 0.0
        for k in range(me):
            y_nl += g[k] * w[k]

        e = d[n] - y_l - y_nl
        ex = e - v[n]
        sq[n] = ex * ex

        gamma_r = 0.0
        if use_attractor:
            pow_d = beta * pow_d + (1.0 - beta) * d[n] * d[n]
            pow_yl = beta * pow_yl + (1.0 - beta) * y_l * y_l
            pow_y = beta * pow_y + (1.0 - beta) * y_nl * y_nl
            pow_e = beta * pow_e + (1.0 - beta) * e * e
            mu_r = abs(1.0 - np.sqrt(abs(pow_d - pow_yl - pow_y)) / (pow_e + xi_vss))
            gamma_r = epsilon * gamma * mu_r

        base_q = (1.0 - alpha) / (2.0 * me)
        norm = 0.0
        for k in range(me):
            norm += abs(w[k])
        scale = (1.0 + alpha) / (2.0 * norm + xi_prop)
        den = delta
        for k in range(me):
            q[k] = base_q + scale * abs(w[k])
            den += q[k] * g[k] * g[k]
        coef = mu * e / den
        if use_attractor:
            for k in range(me):
                wk = w[k]
                s = 1.0 if wk > 0.0 else (-1.0 if wk < 0.0 else 0.0)
                w[k] = wk + coef * q[k] * g[k] - gamma_r * s / (1.0 + epsilon * abs(wk))
        else:
            for k in range(me):
                w[k] += coef * q[k] * g[k]

        coef_l = mu_lin * e / (xnorm + delta_lin)
        for i in range(M):
            t = n - i
            if t >= 0:
                w_lin[i] += coef_l * x[t]

    return sq
