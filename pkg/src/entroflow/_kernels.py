"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The loop versions below are plain Python; they are compiled with ``njit``
and used when the numba backend is active. The ``*_np`` versions vectorise
over the independent axis instead and are the fallback path. Public
wrappers at the bottom dispatch on :func:`entroflow._backend.get_backend`.
"""

import math

import numpy as np

from ._backend import get_backend, njit

# --- fundamental solution -------------------------------------------------


def _series_weights(b, tau, m_max):
    w = np.empty(m_max + 1)
    w[0] = 1.0
    bt = b * tau
    for m in range(1, m_max + 1):
        w[m] = w[m - 1] * bt / m
    return w


def _nodes_loop(a, b, tau, n_nodes, m_max, out):
    w = np.empty(m_max + 1)
    w[0] = 1.0
    bt = b * tau
    for m in range(1, m_max + 1):
        w[m] = w[m - 1] * bt / m
    ea = math.exp(a * tau)
    out[0] = 1.0
    for j in range(1, n_nodes):
        s = 0.0
        c = 0.0
        top = min(j - 1, m_max)
        for m in range(top + 1):
            v = out[j - 1 - m] * w[m]
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
        out[j] = ea * (s + c)
    return out


def _nodes_np(a, b, tau, n_nodes, m_max, out):
    w = _series_weights(b, tau, m_max)
    ea = math.exp(a * tau)
    out[0] = 1.0
    for j in range(1, n_nodes):
        top = min(j - 1, m_max)
        terms = out[j - 1 - top : j][::-1]
        out[j] = ea * math.fsum(terms * w[: top + 1])
    return out


def _interval_index(t, tau):
    k = math.floor(t / tau)
    # guard the floor against t/tau rounding across an interval boundary
    if (k + 1) * tau <= t:
        k += 1
    elif k * tau > t:
        k -= 1
    return k


def _eval_loop(ts, nodes, a, b, tau, m_max, out):
    n_nodes = nodes.shape[0]
    for i in range(ts.shape[0]):
        t = ts[i]
        if t < 0.0:
            out[i] = 0.0
            continue
        k = math.floor(t / tau)
        if (k + 1) * tau <= t:
            k += 1
        elif k * tau > t:
            k -= 1
        if k > n_nodes - 1:
            k = n_nodes - 1
        u = t - k * tau
        bu = b * u
        top = min(k, m_max)
        term = 1.0
        s = 0.0
        c = 0.0
        for m in range(top + 1):
            if m > 0:
                term *= bu / m
            v = nodes[k - m] * term
            tt = s + v
            if abs(s) >= abs(v):
                c += (s - tt) + v
            else:
                c += (v - tt) + s
            s = tt
        out[i] = math.exp(a * u) * (s + c)
    return out


def _eval_np(ts, nodes, a, b, tau, m_max, out):
    ts = np.asarray(ts, dtype=float)
    neg = ts < 0.0
    tc = np.where(neg, 0.0, ts)
    k = np.floor(tc / tau)
    k = np.where((k + 1) * tau <= tc, k + 1, k)
    k = np.where(k * tau > tc, k - 1, k)
    k = np.minimum(k, nodes.shape[0] - 1).astype(np.int64)
    u = tc - k * tau
    bu = b * u
    top = np.minimum(k, m_max)
    term = np.ones_like(tc)
    s = np.zeros_like(tc)
    c = np.zeros_like(tc)
    for m in range(int(top.max(initial=0)) + 1):
        if m > 0:
            term = term * (bu / m)
        active = m <= top
        v = np.where(active, nodes[np.maximum(k - m, 0)] * term, 0.0)
        tt = s + v
        c = c + np.where(np.abs(s) >= np.abs(v), (s - tt) + v, (v - tt) + s)
        s = tt
    out[:] = np.where(neg, 0.0, np.exp(a * u) * (s + c))
    return out


# --- Monte Carlo integrators ------------------------------------------------


def _em_loop(hist, noise, a, b, dt, sig_sqdt, out_idx, guard, out):
    nb = hist.shape[0]
    n_hist = hist.shape[1]
    lag = n_hist - 1
    n_steps = noise.shape[1]
    n_out = out_idx.shape[0]
    path = np.empty(n_hist + n_steps)
    for i in range(nb):
        for j in range(n_hist):
            path[j] = hist[i, j]
        o = 0
        for k in range(n_steps + 1):
            x = path[lag + k]
            while o < n_out and out_idx[o] == k:
                out[i, o] = x
                o += 1
            if k == n_steps:
                break
            if not abs(x) <= guard:
                return i, k
            path[lag + k + 1] = x + (a * x + b * path[k]) * dt + sig_sqdt * noise[i, k]
    return -1, -1


def _em_np(hist, noise, a, b, dt, sig_sqdt, out_idx, guard, out):
    nb, n_hist = hist.shape
    lag = n_hist - 1
    n_steps = noise.shape[1]
    path = np.empty((nb, n_hist + n_steps))
    path[:, :n_hist] = hist
    o = 0
    n_out = out_idx.shape[0]
    for k in range(n_steps + 1):
        x = path[:, lag + k]
        while o < n_out and out_idx[o] == k:
            out[:, o] = x
            o += 1
        if k == n_steps:
            break
        ok = np.abs(x) <= guard
        if not ok.all():
            return int(np.argmin(ok)), k
        path[:, lag + k + 1] = x + (a * x + b * path[:, k]) * dt + sig_sqdt * noise[:, k]
    return -1, -1


def _ou_loop(x0, noise, decay, sd, out_idx, guard, out):
    nb = x0.shape[0]
    n_steps = noise.shape[1]
    n_out = out_idx.shape[0]
    for i in range(nb):
        x = x0[i]
        o = 0
        for k in range(n_steps + 1):
            while o < n_out and out_idx[o] == k:
                out[i, o] = x
                o += 1
            if k == n_steps:
                break
            if not abs(x) <= guard:
                return i, k
            x = decay * x + sd * noise[i, k]
    return -1, -1


def _ou_np(x0, noise, decay, sd, out_idx, guard, out):
    x = np.array(x0, dtype=float)
    n_steps = noise.shape[1]
    n_out = out_idx.shape[0]
    o = 0
    for k in range(n_steps + 1):
        while o < n_out and out_idx[o] == k:
            out[:, o] = x
            o += 1
        if k == n_steps:
            break
        ok = np.abs(x) <= guard
        if not ok.all():
            return int(np.argmin(ok)), k
        x = decay * x + sd * noise[:, k]
    return -1, -1


def _em_green_loop(a, b, dt, lag, n_steps, out):
    # response of the Euler-Maruyama recursion to a unit kick at step 0
    out[0] = 1.0
    for k in range(n_steps - 1):
        d = out[k - lag] if k >= lag else 0.0
        out[k + 1] = out[k] + (a * out[k] + b * d) * dt
    return out


_em_green_np = _em_green_loop  # sequential recursion; no vectorised form

_nodes_nb = njit(cache=True, nogil=True)(_nodes_loop)
_eval_nb = njit(cache=True, nogil=True)(_eval_loop)
_em_nb = njit(cache=True, nogil=True)(_em_loop)
_ou_nb = njit(cache=True, nogil=True)(_ou_loop)
_em_green_nb = njit(cache=True, nogil=True)(_em_green_loop)


def _pick(nb_impl, np_impl):
    return nb_impl if get_backend() == "numba" else np_impl


# --- dispatching wrappers ---------------------------------------------------


def fundamental_nodes(a, b, tau, n_nodes, m_max):
    out = np.empty(n_nodes)
    return _pick(_nodes_nb, _nodes_np)(float(a), float(b), float(tau), int(n_nodes), int(m_max), out)


def fundamental_eval(ts, nodes, a, b, tau, m_max):
    ts = np.asarray(ts, dtype=float)
    flat_in = np.ascontiguousarray(ts.reshape(-1))
    flat_out = np.empty_like(flat_in)
    if flat_in.size:
        _pick(_eval_nb, _eval_np)(flat_in, nodes, float(a), float(b), float(tau), int(m_max), flat_out)
    return flat_out.reshape(ts.shape)


def em_block(hist, noise, a, b, dt, sig_sqdt, out_idx, guard, out):
    return _pick(_em_nb, _em_np)(hist, noise, float(a), float(b), float(dt), float(sig_sqdt),
                                 out_idx, float(guard), out)


def ou_block(x0, noise, decay, sd, out_idx, guard, out):
    return _pick(_ou_nb, _ou_np)(x0, noise, float(decay), float(sd), out_idx, float(guard), out)


def em_green(a, b, dt, lag, n_steps):
    out = np.zeros(n_steps)
    return _pick(_em_green_nb, _em_green_np)(float(a), float(b), float(dt), int(lag), int(n_steps), out)
