"""JIT-compiled numerical kernels.

Scalar special functions and the sequential filter recursions live here so
they can run inside numba-compiled loops; the public modules (`dist`,
`dynamics`) wrap them with validation and error reporting. Nothing in this
module raises: failures are signalled through flag/reason codes.
"""

import math

import numpy as np
from numba import njit

SIGMA2_FLOOR = 2.0 ** -1074  # smallest positive subnormal double

# distribution codes used by the interval filter
DIST_NORMAL = 0
DIST_T = 1
DIST_SKELLAM = 2
DIST_ZI_SKELLAM = 3

# per-observation term flags
FLAG_OK = 0
FLAG_UNDERFLOW = 1
FLAG_SCORE_UNDEFINED = 2

# filter abort reasons
ABORT_NONE = 0
ABORT_SCORE_UNDEFINED = 1
ABORT_DIVERGED = 2

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_HALF = math.sqrt(0.5)


# ---------------------------------------------------------------------------
# regularized incomplete beta and Student's t
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True, error_model="numpy")
def _betacf(a, b, x):
    # Lentz continued fraction for the incomplete beta (Numerical Recipes form)
    eps = 3.0e-16
    fpmin = 1.0e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        de = d * c
        h *= de
        if abs(de - 1.0) < eps:
            break
    return h


@njit(cache=True, nogil=True, error_model="numpy")
def _betainc_pre(a, b, x, lgab):
    """Regularized incomplete beta with lgamma(a+b)-lgamma(a)-lgamma(b)
    supplied (it is constant along a filter run)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    bt = math.exp(lgab + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


@njit(cache=True, nogil=True, error_model="numpy")
def _beta_lgab(a, b):
    return math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)


@njit(cache=True, nogil=True, error_model="numpy")
def betainc_reg(a, b, x):
    """Regularized incomplete beta I_x(a, b) for a, b > 0, 0 <= x <= 1."""
    return _betainc_pre(a, b, x, _beta_lgab(a, b))


@njit(cache=True, nogil=True, error_model="numpy")
def _t_tail_pre(x, nu, lgab):
    """Upper tail P(T > x) for x >= 0 with the beta constant supplied."""
    if x == 0.0:
        return 0.5
    xx = x * x
    if not math.isfinite(xx):
        return 0.0
    z = nu / (nu + xx)
    return 0.5 * _betainc_pre(0.5 * nu, 0.5, z, lgab)


@njit(cache=True, nogil=True, error_model="numpy")
def t_tail(x, nu):
    """Upper tail P(T > x) of the standardized t for x >= 0."""
    return _t_tail_pre(x, nu, _beta_lgab(0.5 * nu, 0.5))


@njit(cache=True, nogil=True, error_model="numpy")
def t_cdf_k(x, nu):
    if x < 0.0:
        return t_tail(-x, nu)
    return 1.0 - t_tail(x, nu)


@njit(cache=True, nogil=True, error_model="numpy")
def t_lognorm(nu):
    """log of the standardized t density normalizing constant."""
    return (math.lgamma(0.5 * (nu + 1.0)) - math.lgamma(0.5 * nu)
            - 0.5 * math.log(nu * math.pi))


@njit(cache=True, nogil=True, error_model="numpy")
def _t_pdf_pre(x, nu, lognorm):
    r = x * x / nu
    if not math.isfinite(r):
        return 0.0
    return math.exp(lognorm - 0.5 * (nu + 1.0) * math.log1p(r))


@njit(cache=True, nogil=True, error_model="numpy")
def t_pdf_k(x, nu):
    return _t_pdf_pre(x, nu, t_lognorm(nu))


@njit(cache=True, nogil=True, error_model="numpy")
def norm_tail(x):
    """Upper tail of the standard normal for x >= 0 (full relative accuracy)."""
    return 0.5 * math.erfc(x * _SQRT_HALF)


@njit(cache=True, nogil=True, error_model="numpy")
def norm_cdf_k(x):
    return 0.5 * math.erfc(-x * _SQRT_HALF)


@njit(cache=True, nogil=True, error_model="numpy")
def norm_pdf_k(x):
    r = 0.5 * x * x
    if not math.isfinite(r):
        return 0.0
    return math.exp(-r - _LN_SQRT_2PI)


@njit(cache=True, nogil=True, error_model="numpy")
def _t_logpdf_pre(u, sigma2, nu, lognorm):
    if u == 0.0:
        ell = 0.0
    else:
        # log(1 + u^2/(nu*sigma2)) without overflow for tiny sigma2
        lr = 2.0 * math.log(abs(u)) - math.log(nu) - math.log(sigma2)
        if lr > 40.0:
            ell = lr
        elif lr < -40.0:
            ell = math.exp(lr)
        else:
            ell = math.log1p(math.exp(lr))
    return lognorm - 0.5 * math.log(sigma2) - 0.5 * (nu + 1.0) * ell


@njit(cache=True, nogil=True, error_model="numpy")
def t_logpdf_scaled(u, sigma2, nu):
    """log density of the location-scale t at deviation u (finite for any
    sigma2 > 0, including subnormals)."""
    return _t_logpdf_pre(u, sigma2, nu, t_lognorm(nu))


@njit(cache=True, nogil=True, error_model="numpy")
def t_density_score(u, sigma2, nu):
    """d log t-density / d ln sigma2; bounded in (-1/2, nu/2)."""
    if u == 0.0:
        return -0.5
    u2 = u * u
    den = nu * sigma2 + u2
    if math.isfinite(den) and den > 0.0:
        w = u2 / den
    else:
        w = 1.0
    return 0.5 * ((nu + 1.0) * w - 1.0)


# ---------------------------------------------------------------------------
# interval probabilities and scores (Student's t / normal kernels)
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True, error_model="numpy")
def _interval_prob_pre(u, sigma, nu, use_t, lgab):
    a = (u - 0.5) / sigma
    b = (u + 0.5) / sigma
    if use_t:
        if a >= 0.0:
            p = _t_tail_pre(a, nu, lgab) - _t_tail_pre(b, nu, lgab)
        elif b <= 0.0:
            p = _t_tail_pre(-b, nu, lgab) - _t_tail_pre(-a, nu, lgab)
        else:
            p = 1.0 - _t_tail_pre(b, nu, lgab) - _t_tail_pre(-a, nu, lgab)
    else:
        if a >= 0.0:
            p = norm_tail(a) - norm_tail(b)
        elif b <= 0.0:
            p = norm_tail(-b) - norm_tail(-a)
        else:
            p = 1.0 - norm_tail(b) - norm_tail(-a)
    if p < 0.0:
        p = 0.0
    return p


@njit(cache=True, nogil=True, error_model="numpy")
def interval_prob(u, sigma, nu, use_t):
    """P(u - 0.5 < X <= u + 0.5) for X ~ sigma * (t_nu or N(0,1)).

    Endpoints in the same tail are computed as a difference of upper-tail
    probabilities so the result stays positive down to the underflow
    threshold.
    """
    lgab = _beta_lgab(0.5 * nu, 0.5) if use_t else 0.0
    return _interval_prob_pre(u, sigma, nu, use_t, lgab)


@njit(cache=True, nogil=True, error_model="numpy")
def _interval_term_pre(u, sigma2, nu, use_t, lgab, lognorm):
    sigma = math.sqrt(sigma2)
    p = _interval_prob_pre(u, sigma, nu, use_t, lgab)
    if p <= 0.0:
        return -np.inf, 0.0, FLAG_UNDERFLOW
    a = (u - 0.5) / sigma
    b = (u + 0.5) / sigma
    if use_t:
        fa = _t_pdf_pre(a, nu, lognorm)
        fb = _t_pdf_pre(b, nu, lognorm)
    else:
        fa = norm_pdf_k(a)
        fb = norm_pdf_k(b)
    den = 2.0 * sigma * p
    if den <= 0.0:
        return math.log(p), 0.0, FLAG_SCORE_UNDEFINED
    score = ((u - 0.5) * fa - (u + 0.5) * fb) / den
    if not math.isfinite(score):
        return math.log(p), 0.0, FLAG_SCORE_UNDEFINED
    return math.log(p), score, FLAG_OK


@njit(cache=True, nogil=True, error_model="numpy")
def interval_term(u, sigma2, nu, use_t):
    """Per-observation interval log-probability and score w.r.t. ln sigma2.

    Returns (logp, score, flag); on underflow logp is -inf and the score is
    not meaningful.
    """
    if use_t:
        return _interval_term_pre(u, sigma2, nu, True,
                                  _beta_lgab(0.5 * nu, 0.5), t_lognorm(nu))
    return _interval_term_pre(u, sigma2, nu, False, 0.0, 0.0)


# ---------------------------------------------------------------------------
# exponentially scaled modified Bessel I and the Skellam family
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True, error_model="numpy")
def _ive_hankel(n, x):
    """Exponentially scaled I_n(x) from the large-argument asymptotic series,
    truncated at the smallest term. Accurate for x > ~700 with n^2 << x."""
    mu4 = 4.0 * float(n) * float(n)
    term = 1.0
    total = 1.0
    for j in range(1, 80):
        c = 2.0 * j - 1.0
        nxt = term * (c * c - mu4) / (8.0 * x * j)
        if abs(nxt) >= abs(term):
            break
        total += nxt
        term = nxt
        if abs(nxt) < 1e-18 * abs(total):
            break
    return total / math.sqrt(2.0 * math.pi * x)


@njit(cache=True, nogil=True, error_model="numpy")
def _ive_triple(n, x):
    """(ive(n-1, x), ive(n, x), ive(n+1, x)) by Miller downward recurrence.

    Normalization uses ive(0) + 2*sum_k ive(k) = 1, so no unscaled Bessel
    value is ever formed; intermediate growth is handled by rescaling. Any
    output may underflow to 0 for n >> x (callers fall back to log-series).
    Arguments above 700 with moderate order use the asymptotic expansion
    instead (the recurrence length grows like x there).
    """
    if x <= 0.0:
        if n == 0:
            return 0.0, 1.0, 0.0
        if n == 1:
            return 1.0, 0.0, 0.0
        return 0.0, 0.0, 0.0
    if x > 700.0 and (n + 1.0) * (n + 1.0) < 0.5 * x:
        lo = _ive_hankel(1, x) if n == 0 else _ive_hankel(n - 1, x)
        return lo, _ive_hankel(n, x), _ive_hankel(n + 1, x)
    base = max(float(n), x)
    m_start = int(base + 8.0 * math.sqrt(base) + 30.0)
    u_hi = 0.0          # u_{m+1}
    u_lo = 1.0e-280     # u_m
    total = 0.0
    out_m1 = 0.0
    out_n = 0.0
    out_p1 = 0.0
    for m in range(m_start, 0, -1):
        u_next = u_hi + (2.0 * m / x) * u_lo  # u_{m-1}
        total += 2.0 * u_lo
        if m - 1 == n + 1:
            out_p1 = u_next
        if m - 1 == n:
            out_n = u_next
        if m - 1 == n - 1:
            out_m1 = u_next
        if m == n + 1:
            out_p1 = u_lo
        if m == n:
            out_n = u_lo
        if m == n - 1:
            out_m1 = u_lo
        u_hi = u_lo
        u_lo = u_next
        if u_lo > 1.0e250:
            u_lo *= 1.0e-250
            u_hi *= 1.0e-250
            total *= 1.0e-250
            out_m1 *= 1.0e-250
            out_n *= 1.0e-250
            out_p1 *= 1.0e-250
    total += u_lo  # u_0 counted once
    if n == 0:
        out_n = u_lo
        out_m1 = out_p1  # I_{-1} = I_1
    if n == 1:
        out_m1 = u_lo
    return out_m1 / total, out_n / total, out_p1 / total


@njit(cache=True, nogil=True, error_model="numpy")
def _log_bessel_i_series(n, x):
    """log I_n(x) from the ascending series; accurate when the Miller pass
    underflows (n well above x)."""
    lhalf = math.log(0.5 * x)
    m = n * lhalf - math.lgamma(n + 1.0)
    s = 1.0
    best = m
    for j in range(1, 500):
        lt = (n + 2.0 * j) * lhalf - math.lgamma(j + 1.0) - math.lgamma(n + j + 1.0)
        if lt > best:
            s = s * math.exp(best - lt) + 1.0
            best = lt
        else:
            d = math.exp(lt - best)
            s += d
            if d < 1.0e-18 and j > 0.25 * x * x / max(j, 1):
                break
    return best + math.log(s)


@njit(cache=True, nogil=True, error_model="numpy")
def _poisson_logpmf(k, lam):
    if lam == 0.0:
        if k == 0:
            return 0.0
        return -np.inf
    return k * math.log(lam) - lam - math.lgamma(k + 1.0)


@njit(cache=True, nogil=True, error_model="numpy")
def skellam_logpmf_k(k, mu, sigma2):
    """log pmf of the difference of two Poissons with rates (sigma2 +/- mu)/2."""
    lam1 = 0.5 * (sigma2 + mu)
    lam2 = 0.5 * (sigma2 - mu)
    if lam1 < 0.0 or lam2 < 0.0:
        return np.nan
    if lam2 == 0.0:
        return _poisson_logpmf(k, lam1) if k >= 0 else -np.inf
    if lam1 == 0.0:
        return _poisson_logpmf(-k, lam2) if k <= 0 else -np.inf
    x = 2.0 * math.sqrt(lam1 * lam2)
    n = abs(int(k))
    d = math.sqrt(lam1) - math.sqrt(lam2)
    # -(lam1 + lam2) + x = -(sqrt(lam1) - sqrt(lam2))^2
    base = -d * d + 0.5 * k * (math.log(lam1) - math.log(lam2))
    _, iv, _ = _ive_triple(n, x)
    if iv > 0.0:
        return base + math.log(iv)
    return base + _log_bessel_i_series(n, x) - x


@njit(cache=True, nogil=True, error_model="numpy")
def skellam_term_k(k, mu, sigma2):
    """(logpmf, score w.r.t. ln sigma2, flag) in one Bessel pass.

    At a boundary (one Poisson rate zero) the pmf is exact but the score is
    flagged undefined. Orders beyond 500 use a central finite difference of
    the log pmf (step 1e-7 * sigma2) instead of the Bessel ratio.
    """
    lam1 = 0.5 * (sigma2 + mu)
    lam2 = 0.5 * (sigma2 - mu)
    if lam1 < 0.0 or lam2 < 0.0:
        return np.nan, 0.0, FLAG_SCORE_UNDEFINED
    if lam2 == 0.0:
        lp = _poisson_logpmf(k, lam1) if k >= 0 else -np.inf
        return lp, 0.0, FLAG_SCORE_UNDEFINED
    if lam1 == 0.0:
        lp = _poisson_logpmf(-k, lam2) if k <= 0 else -np.inf
        return lp, 0.0, FLAG_SCORE_UNDEFINED
    n = abs(int(k))
    if n > 500:
        lp = skellam_logpmf_k(k, mu, sigma2)
        h = 1.0e-7 * sigma2
        lp_hi = skellam_logpmf_k(k, mu, sigma2 + h)
        lp_lo = skellam_logpmf_k(k, mu, sigma2 - h)
        if not (math.isfinite(lp_hi) and math.isfinite(lp_lo)):
            return lp, 0.0, FLAG_SCORE_UNDEFINED
        return lp, sigma2 * (lp_hi - lp_lo) / (2.0 * h), FLAG_OK
    x = 2.0 * math.sqrt(lam1 * lam2)
    if x <= 0.0:
        # product of subnormal rates underflowed; effectively at the boundary
        return skellam_logpmf_k(k, mu, sigma2), 0.0, FLAG_SCORE_UNDEFINED
    d = math.sqrt(lam1) - math.sqrt(lam2)
    base = -d * d + 0.5 * k * (math.log(lam1) - math.log(lam2))
    im1, iv, ip1 = _ive_triple(n, x)
    if iv > 0.0:
        lp = base + math.log(iv)
        ratio = 0.5 * (im1 + ip1) / iv
    else:
        ln_n = _log_bessel_i_series(n, x)
        lp = base + ln_n - x
        ln_m1 = _log_bessel_i_series(1 if n == 0 else n - 1, x)
        ln_p1 = _log_bessel_i_series(n + 1, x)
        ratio = 0.5 * (math.exp(ln_m1 - ln_n) + math.exp(ln_p1 - ln_n))
    score = sigma2 * (-1.0 + 0.25 * k * (1.0 / lam1 - 1.0 / lam2)
                      + ratio * sigma2 / x)
    if not math.isfinite(score):
        return lp, 0.0, FLAG_SCORE_UNDEFINED
    return lp, score, FLAG_OK


@njit(cache=True, nogil=True, error_model="numpy")
def skellam_score_k(k, mu, sigma2):
    """(score, flag): d log pmf / d ln sigma2 for the Skellam pmf."""
    _, score, flag = skellam_term_k(k, mu, sigma2)
    return score, flag


@njit(cache=True, nogil=True, error_model="numpy")
def zi_skellam_term_k(k, mu, sigma2, pi):
    """(logpmf, score, flag) for the zero-inflated Skellam, one Bessel pass."""
    lp, score, flag = skellam_term_k(k, mu, sigma2)
    if k != 0:
        return lp + math.log1p(-pi), score, flag
    if pi <= 0.0:
        return lp, score, flag
    la = math.log(pi)
    if lp == -np.inf:
        return la, 0.0, flag
    lb = math.log1p(-pi) + lp
    hi = max(la, lb)
    lz = hi + math.log1p(math.exp(min(la, lb) - hi))
    w = math.exp(lb - lz)
    return lz, w * score, flag


@njit(cache=True, nogil=True, error_model="numpy")
def zi_skellam_logpmf_k(k, mu, sigma2, pi):
    lp = skellam_logpmf_k(k, mu, sigma2)
    if k != 0:
        return lp + math.log1p(-pi)
    if pi <= 0.0:
        return lp
    la = math.log(pi)
    if lp == -np.inf:
        return la
    lb = math.log1p(-pi) + lp
    hi = max(la, lb)
    return hi + math.log1p(math.exp(min(la, lb) - hi))


@njit(cache=True, nogil=True, error_model="numpy")
def zi_skellam_score_k(k, mu, sigma2, pi):
    _, score, flag = zi_skellam_term_k(k, mu, sigma2, pi)
    return score, flag


# ---------------------------------------------------------------------------
# per-observation dispatch used by the interval filter
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True, error_model="numpy")
def _obs_term(y, mu, sigma2, nu, pi, dist_code):
    if dist_code == DIST_NORMAL:
        return interval_term(y - mu, sigma2, 0.0, False)
    if dist_code == DIST_T:
        return interval_term(y - mu, sigma2, nu, True)
    if dist_code == DIST_SKELLAM:
        lp, score, flag = skellam_term_k(y, mu, sigma2)
        if lp == -np.inf:
            return lp, 0.0, FLAG_UNDERFLOW
        return lp, score, flag
    lp, score, flag = zi_skellam_term_k(y, mu, sigma2, pi)
    if lp == -np.inf:
        return lp, 0.0, FLAG_UNDERFLOW
    return lp, score, flag


# ---------------------------------------------------------------------------
# filter recursions
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True, error_model="numpy")
def filter_interval_k(y, lnshat, theta, omega, alpha, phi, nu, pi, dist_code,
                      mu0, e0):
    """Score-driven interval filter.

    State: mu_{t+1} = theta * (y_t - mu_t);  e_{t+1} = alpha * score_t + phi * e_t;
    ln sigma2_t = omega + ln s_t + e_t. Underflowed observations contribute a
    -inf log-likelihood term and a zero score so the recursion can continue
    (out-of-sample accounting); other score failures abort. Returns the
    post-sample state (mu, e) so series can be filtered in segments.
    """
    n = y.shape[0]
    mu_path = np.empty(n)
    sigma2_path = np.empty(n)
    e_path = np.empty(n)
    score_path = np.empty(n)
    terms = np.empty(n)
    underflow = 0
    floored = 0
    mu = mu0
    e = e0
    use_t = dist_code == DIST_T
    lgab = _beta_lgab(0.5 * nu, 0.5) if use_t else 0.0
    lognorm = t_lognorm(nu) if use_t else 0.0
    for t in range(n):
        ls = omega + lnshat[t] + e
        if not math.isfinite(ls):
            return (mu_path, sigma2_path, e_path, score_path, terms, underflow,
                    floored, ABORT_DIVERGED, t, mu, e)
        sigma2 = math.exp(ls)
        if dist_code >= DIST_SKELLAM:
            lo = abs(mu) * (1.0 + 1.0e-12)
            if sigma2 < lo:
                sigma2 = lo
                floored += 1
        if not math.isfinite(sigma2) or sigma2 <= 0.0:
            return (mu_path, sigma2_path, e_path, score_path, terms, underflow,
                    floored, ABORT_DIVERGED, t, mu, e)
        if dist_code == DIST_NORMAL:
            lp, score, flag = _interval_term_pre(y[t] - mu, sigma2, 0.0, False,
                                                 0.0, 0.0)
        elif dist_code == DIST_T:
            lp, score, flag = _interval_term_pre(y[t] - mu, sigma2, nu, True,
                                                 lgab, lognorm)
        elif dist_code == DIST_SKELLAM:
            lp, score, flag = skellam_term_k(y[t], mu, sigma2)
        else:
            lp, score, flag = zi_skellam_term_k(y[t], mu, sigma2, pi)
        if lp == -np.inf:
            flag = FLAG_UNDERFLOW
        if flag == FLAG_SCORE_UNDEFINED:
            return (mu_path, sigma2_path, e_path, score_path, terms, underflow,
                    floored, ABORT_SCORE_UNDEFINED, t, mu, e)
        if flag == FLAG_UNDERFLOW:
            underflow += 1
            score = 0.0
        mu_path[t] = mu
        sigma2_path[t] = sigma2
        e_path[t] = e
        score_path[t] = score
        terms[t] = lp
        e = alpha * score + phi * e
        mu = theta * (y[t] - mu)
    return (mu_path, sigma2_path, e_path, score_path, terms, underflow,
            floored, ABORT_NONE, -1, mu, e)


@njit(cache=True, nogil=True, error_model="numpy")
def filter_garch_k(y, mu, omega, alpha, phi, nu, sigma2_init):
    """GARCH(1,1) recursion with continuous scaled-t log-density terms."""
    n = y.shape[0]
    sigma2_path = np.empty(n)
    e_path = np.empty(n)
    terms = np.empty(n)
    sigma2 = sigma2_init
    lognorm = t_lognorm(nu)
    for t in range(n):
        if not math.isfinite(sigma2) or sigma2 <= 0.0:
            return sigma2_path, e_path, terms, ABORT_DIVERGED, t, sigma2
        e = y[t] - mu
        sigma2_path[t] = sigma2
        e_path[t] = e
        terms[t] = _t_logpdf_pre(e, sigma2, nu, lognorm)
        sigma2 = omega + alpha * e * e + phi * sigma2
    return sigma2_path, e_path, terms, ABORT_NONE, -1, sigma2


@njit(cache=True, nogil=True, error_model="numpy")
def filter_gas_k(y, mu, omega, alpha, phi, nu, literal_level, ls_init):
    """Score-driven recursion for ln sigma2 with the continuous t score.

    literal_level switches the autoregressive term from phi * ln sigma2_{t-1}
    to phi * sigma2_{t-1} for comparison runs.
    """
    n = y.shape[0]
    sigma2_path = np.empty(n)
    score_path = np.empty(n)
    terms = np.empty(n)
    ls = ls_init
    lognorm = t_lognorm(nu)
    for t in range(n):
        if not math.isfinite(ls):
            return sigma2_path, score_path, terms, ABORT_DIVERGED, t, ls
        sigma2 = math.exp(ls)
        if not math.isfinite(sigma2) or sigma2 <= 0.0:
            return sigma2_path, score_path, terms, ABORT_DIVERGED, t, ls
        u = y[t] - mu
        score = t_density_score(u, sigma2, nu)
        sigma2_path[t] = sigma2
        score_path[t] = score
        terms[t] = _t_logpdf_pre(u, sigma2, nu, lognorm)
        if literal_level:
            ls = omega + alpha * score + phi * sigma2
        else:
            ls = omega + alpha * score + phi * ls
    return sigma2_path, score_path, terms, ABORT_NONE, -1, ls


# ---------------------------------------------------------------------------
# static (single sigma2) likelihoods for the degeneracy scans
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True, error_model="numpy")
def static_t_density_loglik(y, sigma2, nu):
    total = 0.0
    lognorm = t_lognorm(nu)
    for t in range(y.shape[0]):
        total += _t_logpdf_pre(y[t], sigma2, nu, lognorm)
    return total


@njit(cache=True, nogil=True, error_model="numpy")
def static_interval_loglik(y, sigma2, nu, use_t):
    """(total, underflow_count); total is -inf if any term underflows."""
    total = 0.0
    underflow = 0
    sigma = math.sqrt(sigma2)
    lgab = _beta_lgab(0.5 * nu, 0.5) if use_t else 0.0
    for t in range(y.shape[0]):
        p = _interval_prob_pre(y[t], sigma, nu, use_t, lgab)
        if p <= 0.0:
            underflow += 1
            total = -np.inf
        elif math.isfinite(total):
            total += math.log(p)
    return total, underflow


def warmup():
    """Force compilation of every kernel (numba caches persist afterwards)."""
    y = np.array([0.0, 1.0, -2.0, 0.0])
    z = np.zeros(4)
    betainc_reg(2.5, 0.5, 0.3)
    t_cdf_k(0.3, 5.0)
    t_pdf_k(0.3, 5.0)
    norm_cdf_k(0.3)
    t_logpdf_scaled(1.0, 2.0, 5.0)
    t_density_score(1.0, 2.0, 5.0)
    interval_term(1.0, 2.0, 5.0, True)
    interval_term(1.0, 2.0, 0.0, False)
    skellam_logpmf_k(1.0, 0.0, 2.0)
    skellam_score_k(1.0, 0.0, 2.0)
    zi_skellam_logpmf_k(0.0, 0.0, 2.0, 0.3)
    zi_skellam_score_k(0.0, 0.0, 2.0, 0.3)
    filter_interval_k(y, z, -0.3, 0.5, 0.05, 0.9, 8.0, 0.0, DIST_T, 0.0, 0.0)
    filter_interval_k(y, z, -0.3, 0.5, 0.05, 0.9, 0.0, 0.0, DIST_NORMAL, 0.0, 0.0)
    filter_interval_k(y, z, -0.3, 0.5, 0.05, 0.9, 0.0, 0.0, DIST_SKELLAM, 0.0, 0.0)
    filter_interval_k(y, z, -0.3, 0.5, 0.05, 0.9, 0.0, 0.2, DIST_ZI_SKELLAM, 0.0, 0.0)
    filter_garch_k(y, 0.0, 0.1, 0.1, 0.8, 8.0, 1.0)
    filter_gas_k(y, 0.0, 0.5, 0.05, 0.9, 8.0, False, 5.0)
    static_t_density_loglik(y, 1.0, 5.0)
    static_interval_loglik(y, 1.0, 5.0, True)
