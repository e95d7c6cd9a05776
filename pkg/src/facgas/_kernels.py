"""Rejection-free kinetic Monte Carlo kernels.

The enabled moves form two buckets (rightward, leftward) whose per-move
rates are the constants p and p'; the total rate is therefore
p*n_right + p'*n_left, waiting times are exponential in that rate times
the accelerated clock, and a move is picked uniformly inside the chosen
bucket.  Buckets are flat arrays with swap-with-last removal and a
position index, so every event costs O(1) bookkeeping.

All kernels consume randomness from a numpy Generator passed in by the
caller (one counter-based stream per replica) and record state snapshots
at the requested macroscopic observation times.  Observation times are
strictly before the next event's jump time, matching the cadlag
convention that the state at an event time is the post-jump one.
"""

import numpy as np
from numba import njit

# event direction codes
RIGHT = 0
LEFT = 1


@njit(cache=True, inline="always")
def _wrap(i, n):
    if i >= n:
        return i - n
    if i < 0:
        return i + n
    return i


@njit(cache=True)
def fep_kernel(occ, periodic, p, pp, rate_scale, obs_times,
               snaps, x1_out, nev_out, x1_init, track_x1, gen,
               rec_times, rec_edges, rec_dirs, max_rec):
    """Facilitated exclusion dynamics.

    Right move at edge e: occ[e-1]=1, occ[e]=1, occ[e+1]=0, particle e -> e+1.
    Left  move at edge e: occ[e]=0, occ[e+1]=1, occ[e+2]=1, particle e+1 -> e.
    On the line only edges whose full three-site pattern lies inside the
    array are eligible; reaching the outermost cells sets the pad flag.

    Returns (n_events, n_recorded, pad_touched, record_overflow).
    """
    n = occ.shape[0]
    n_obs = obs_times.shape[0]
    record = max_rec > 0

    in_r = np.zeros(n, np.bool_)
    in_l = np.zeros(n, np.bool_)
    r_list = np.empty(n, np.int32)
    l_list = np.empty(n, np.int32)
    r_pos = np.full(n, -1, np.int32)
    l_pos = np.full(n, -1, np.int32)
    nr = 0
    nl = 0
    if periodic:
        e_lo_r, e_hi_r = 0, n - 1
        e_lo_l, e_hi_l = 0, n - 1
    else:
        e_lo_r, e_hi_r = 1, n - 2
        e_lo_l, e_hi_l = 0, n - 3
    for e in range(n):
        if e_lo_r <= e <= e_hi_r:
            em1 = _wrap(e - 1, n)
            ep1 = _wrap(e + 1, n)
            if occ[em1] == 1 and occ[e] == 1 and occ[ep1] == 0:
                in_r[e] = True
                r_pos[e] = nr
                r_list[nr] = e
                nr += 1
        if e_lo_l <= e <= e_hi_l:
            ep1 = _wrap(e + 1, n)
            ep2 = _wrap(e + 2, n)
            if occ[e] == 0 and occ[ep1] == 1 and occ[ep2] == 1:
                in_l[e] = True
                l_pos[e] = nl
                l_list[nl] = e
                nl += 1

    t = 0.0
    x1 = x1_init  # unwrapped tagged-hole position
    nev = 0
    nrec = 0
    obs_i = 0
    pad = False
    overflow = False
    while obs_i < n_obs:
        rate = p * nr + pp * nl
        if rate <= 0.0:
            break
        t_next = t + -np.log(gen.random()) / (rate * rate_scale)
        while obs_i < n_obs and obs_times[obs_i] < t_next:
            snaps[obs_i, :] = occ
            x1_out[obs_i] = x1
            nev_out[obs_i] = nev
            obs_i += 1
        if obs_i >= n_obs:
            break
        t = t_next

        u = gen.random() * rate
        if u < p * nr:
            ev_dir = RIGHT
            e = r_list[np.int64(u / p)]
            x = e
            xp = _wrap(e + 1, n)
            if track_x1 and x1 % n == xp:
                x1 -= 1
        else:
            ev_dir = LEFT
            e = l_list[np.int64((u - p * nr) / pp)]
            x = _wrap(e + 1, n)
            xp = e
            if track_x1 and x1 % n == xp:
                x1 += 1
        occ[x] = 0
        occ[xp] = 1
        nev += 1
        if record:
            if nrec >= max_rec:
                overflow = True
                break
            rec_times[nrec] = t
            rec_edges[nrec] = e
            rec_dirs[nrec] = ev_dir
            nrec += 1
        if not periodic and (x == 0 or x == n - 1 or xp == 0 or xp == n - 1):
            pad = True

        lo = x if x < xp else xp
        if periodic and (x == 0 and xp == n - 1 or xp == 0 and x == n - 1):
            lo = n - 1  # the wrapped edge
        # right edges depend on sites e-1, e, e+1: e in [lo-1, lo+2]
        for k in range(-1, 3):
            e2 = lo + k
            if periodic:
                e2 = _wrap(e2, n)
            elif e2 < e_lo_r or e2 > e_hi_r:
                continue
            em1 = _wrap(e2 - 1, n)
            ep1 = _wrap(e2 + 1, n)
            want = occ[em1] == 1 and occ[e2] == 1 and occ[ep1] == 0
            if want != in_r[e2]:
                if want:
                    in_r[e2] = True
                    r_pos[e2] = nr
                    r_list[nr] = e2
                    nr += 1
                else:
                    in_r[e2] = False
                    j = r_pos[e2]
                    nr -= 1
                    last = r_list[nr]
                    r_list[j] = last
                    r_pos[last] = j
                    r_pos[e2] = -1
        # left edges depend on sites e, e+1, e+2: e in [lo-2, lo+1]
        for k in range(-2, 2):
            e2 = lo + k
            if periodic:
                e2 = _wrap(e2, n)
            elif e2 < e_lo_l or e2 > e_hi_l:
                continue
            ep1 = _wrap(e2 + 1, n)
            ep2 = _wrap(e2 + 2, n)
            want = occ[e2] == 0 and occ[ep1] == 1 and occ[ep2] == 1
            if want != in_l[e2]:
                if want:
                    in_l[e2] = True
                    l_pos[e2] = nl
                    l_list[nl] = e2
                    nl += 1
                else:
                    in_l[e2] = False
                    j = l_pos[e2]
                    nl -= 1
                    last = l_list[nl]
                    l_list[j] = last
                    l_pos[last] = j
                    l_pos[e2] = -1

    # no more events (absorbed or horizon passed): freeze remaining records
    while obs_i < n_obs:
        snaps[obs_i, :] = occ
        x1_out[obs_i] = x1
        nev_out[obs_i] = nev
        obs_i += 1
    return nev, nrec, pad, overflow


@njit(cache=True)
def fzrp_kernel(h, periodic, p, pp, rate_scale, obs_times,
                snaps, cur_out, nev_out, gen):
    """Facilitated zero-range dynamics (rate 1{h >= 2} per direction).

    A site with h >= 2 emits one particle rightward at rate p and leftward
    at rate p'.  Currents J[y] count signed crossings of bond (y, y+1).
    Returns (n_events, pad_touched).
    """
    n = h.shape[0]
    n_obs = obs_times.shape[0]

    act = np.empty(n, np.int32)
    pos = np.full(n, -1, np.int32)
    na = 0
    lo_ok = 0 if periodic else 1
    hi_ok = n - 1 if periodic else n - 2
    if n < 2:
        hi_ok = -1  # single-site ring: no move changes anything
    for y in range(lo_ok, hi_ok + 1):
        if h[y] >= 2:
            pos[y] = na
            act[na] = y
            na += 1
    J = np.zeros(n, np.int64)

    t = 0.0
    nev = 0
    obs_i = 0
    pad = False
    per_site = p + pp
    while obs_i < n_obs:
        rate = per_site * na
        if rate <= 0.0:
            break
        t_next = t + -np.log(gen.random()) / (rate * rate_scale)
        while obs_i < n_obs and obs_times[obs_i] < t_next:
            snaps[obs_i, :] = h
            cur_out[obs_i, :] = J
            nev_out[obs_i] = nev
            obs_i += 1
        if obs_i >= n_obs:
            break
        t = t_next

        u = gen.random() * rate
        idx = np.int64(u / per_site)
        y = act[idx]
        rem = u - idx * per_site
        if rem < p:
            dst = _wrap(y + 1, n)
            J[y] += 1
        else:
            dst = _wrap(y - 1, n)
            J[dst] -= 1
        h[y] -= 1
        h[dst] += 1
        nev += 1
        if not periodic and (y == 0 or y == n - 1 or dst == 0 or dst == n - 1):
            pad = True

        if h[y] < 2 and pos[y] >= 0:
            j = pos[y]
            na -= 1
            last = act[na]
            act[j] = last
            pos[last] = j
            pos[y] = -1
        if h[dst] >= 2 and pos[dst] < 0 and lo_ok <= dst <= hi_ok:
            pos[dst] = na
            act[na] = dst
            na += 1

    while obs_i < n_obs:
        snaps[obs_i, :] = h
        cur_out[obs_i, :] = J
        nev_out[obs_i] = nev
        obs_i += 1
    return nev, pad


@njit(cache=True)
def sign_changes(a, b, periodic):
    """Number of strict sign changes of a - b along the lattice (cyclically
    on the torus), zeros skipped."""
    n = a.shape[0]
    count = 0
    prev = 0
    first = 0
    for y in range(n):
        d = a[y] - b[y]
        s = 0
        if d > 0:
            s = 1
        elif d < 0:
            s = -1
        if s == 0:
            continue
        if prev != 0 and s != prev:
            count += 1
        if first == 0:
            first = s
        prev = s
    if periodic and prev != 0 and first != 0 and prev != first:
        count += 1
    return count


@njit(cache=True)
def coupled_fzrp_kernel(h1, h2, periodic, p, pp, rate_scale, obs_times,
                        snaps1, snaps2, nev_out, gen,
                        check_order, track_signs):
    """Basic coupling of two zero-range configurations on shared clocks.

    Each site where either pile has >= 2 particles rings rightward at rate
    p and leftward at rate p'; the jump is executed in every marginal whose
    pile is >= 2.  Viewed alone, each marginal is the zero-range process,
    and when started from the diagonal the drawn randomness matches
    fzrp_kernel event for event.

    Returns (n_events, pad_touched, order_violations, max_sign_increase).
    """
    n = h1.shape[0]
    n_obs = obs_times.shape[0]

    act = np.empty(n, np.int32)
    pos = np.full(n, -1, np.int32)
    na = 0
    lo_ok = 0 if periodic else 1
    hi_ok = n - 1 if periodic else n - 2
    if n < 2:
        hi_ok = -1
    for y in range(lo_ok, hi_ok + 1):
        if h1[y] >= 2 or h2[y] >= 2:
            pos[y] = na
            act[na] = y
            na += 1

    t = 0.0
    nev = 0
    obs_i = 0
    pad = False
    violations = 0
    max_sign_inc = 0
    prev_signs = sign_changes(h1, h2, periodic) if track_signs else 0
    per_site = p + pp
    while obs_i < n_obs:
        rate = per_site * na
        if rate <= 0.0:
            break
        t_next = t + -np.log(gen.random()) / (rate * rate_scale)
        while obs_i < n_obs and obs_times[obs_i] < t_next:
            snaps1[obs_i, :] = h1
            snaps2[obs_i, :] = h2
            nev_out[obs_i] = nev
            obs_i += 1
        if obs_i >= n_obs:
            break
        t = t_next

        u = gen.random() * rate
        idx = np.int64(u / per_site)
        y = act[idx]
        rem = u - idx * per_site
        if rem < p:
            dst = _wrap(y + 1, n)
        else:
            dst = _wrap(y - 1, n)
        if h1[y] >= 2:
            h1[y] -= 1
            h1[dst] += 1
        if h2[y] >= 2:
            h2[y] -= 1
            h2[dst] += 1
        nev += 1
        if not periodic and (y == 0 or y == n - 1 or dst == 0 or dst == n - 1):
            pad = True
        if check_order and (h1[y] > h2[y] or h1[dst] > h2[dst]):
            violations += 1
        if track_signs:
            s = sign_changes(h1, h2, periodic)
            if s - prev_signs > max_sign_inc:
                max_sign_inc = s - prev_signs
            prev_signs = s

        if h1[y] < 2 and h2[y] < 2 and pos[y] >= 0:
            j = pos[y]
            na -= 1
            last = act[na]
            act[j] = last
            pos[last] = j
            pos[y] = -1
        if (h1[dst] >= 2 or h2[dst] >= 2) and pos[dst] < 0 and lo_ok <= dst <= hi_ok:
            pos[dst] = na
            act[na] = dst
            na += 1

    while obs_i < n_obs:
        snaps1[obs_i, :] = h1
        snaps2[obs_i, :] = h2
        nev_out[obs_i] = nev
        obs_i += 1
    return nev, pad, violations, max_sign_inc


@njit(cache=True)
def replay_state_times(occ, edges, dirs, times, horizon):
    """Bitmask state id and holding time for every inter-event interval of a
    recorded exclusion trajectory (small lattices only: n <= 62)."""
    n = occ.shape[0]
    m = edges.shape[0]
    ids = np.empty(m + 1, np.int64)
    hold = np.empty(m + 1, np.float64)
    state = 0
    for x in range(n):
        if occ[x]:
            state |= 1 << x
    t_prev = 0.0
    for k in range(m):
        ids[k] = state
        hold[k] = times[k] - t_prev
        t_prev = times[k]
        e = edges[k]
        ep1 = e + 1 if e + 1 < n else 0
        if dirs[k] == RIGHT:
            state &= ~(1 << e)
            state |= 1 << ep1
        else:
            state &= ~(1 << ep1)
            state |= 1 << e
    ids[m] = state
    hold[m] = horizon - t_prev
    return ids, hold
