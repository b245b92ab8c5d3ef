"""Independent reference implementations used by the test suite.

Everything here is written with per-pixel Python loops and hand-rolled
file parsing, sharing no code with the package under test. Scalar
reductions follow the package's written arithmetic conventions (exact
integer pixel counts, math.fsum for jitter- and candidate-level sums,
sequential float64 accumulation for map averaging and fusion), so the
two routes agree bit-for-bit where tests demand it and within stated
tolerances elsewhere.
"""

import math
import struct
import zlib
from pathlib import Path


def _rows(x):
    """Iterate a 2-D array-like as rows of Python floats."""
    return [[float(v) for v in row] for row in x]


def _flat_bits(x):
    return [1 if bool(v) else 0 for row in x for v in row]


# ---------------------------------------------------------------------------
# thresholding / consensus / soft IoU

def naive_binarize(p, tau):
    return [[1 if float(v) > tau else 0 for v in row] for row in p]


def naive_consensus(masks):
    ms = [_rows(m) for m in masks]
    k = len(ms)
    h = len(ms[0])
    w = len(ms[0][0])
    out = []
    for r in range(h):
        out.append([sum(ms[j][r][c] for j in range(k)) / k for c in range(w)])
    return out


def naive_soft_iou(mask, cons, eps):
    m = _rows(mask)
    c = _rows(cons)
    num_terms = []
    den_terms = []
    for mr, cr in zip(m, c):
        for mv, cv in zip(mr, cr):
            num_terms.append(min(mv, cv))
            den_terms.append(max(mv, cv))
    return math.fsum(num_terms) / (math.fsum(den_terms) + eps)


# ---------------------------------------------------------------------------
# percentile and threshold grid

def naive_percentile(values, p):
    xs = sorted(float(v) for v in values)
    rank = (p / 100.0) * (len(xs) - 1)
    lo = math.floor(rank)
    hi = math.ceil(rank)
    frac = rank - lo
    return xs[lo] + frac * (xs[hi] - xs[lo])


def naive_threshold_set(region, cfg):
    """Threshold grid from the in-box reference values; mirrors the
    documented construction: [max(tau_min, q10+margin), min(tau_max,
    q90-margin)], M uniform points, median fallback on collapse."""
    q10 = naive_percentile(region, 10.0)
    q90 = naive_percentile(region, 90.0)
    tau_lo = max(cfg["tau_min"], q10 + cfg["tau_margin"])
    tau_hi = min(cfg["tau_max"], q90 - cfg["tau_margin"])
    if tau_lo < tau_hi:
        m = cfg["m_grid"]
        if m == 1:
            return [(tau_lo + tau_hi) / 2.0], "grid"
        taus = []
        for j in range(m):
            if j == 0:
                taus.append(tau_lo)
            elif j == m - 1:
                taus.append(tau_hi)
            else:
                taus.append(tau_lo + (j / (m - 1)) * (tau_hi - tau_lo))
        if all(a < b for a, b in zip(taus, taus[1:])):
            return taus, "grid"
        return [(tau_lo + tau_hi) / 2.0], "grid"
    med = naive_percentile(region, 50.0)
    return [min(max(med, cfg["tau_min"]), cfg["tau_max"])], "fallback-median"


# ---------------------------------------------------------------------------
# mask metrics

def naive_dice(a, b):
    fa = _flat_bits(a)
    fb = _flat_bits(b)
    na = sum(fa)
    nb = sum(fb)
    if na + nb == 0:
        return 1.0
    inter = sum(1 for x, y in zip(fa, fb) if x and y)
    return 2.0 * inter / (na + nb)


def naive_iou(a, b):
    fa = _flat_bits(a)
    fb = _flat_bits(b)
    inter = sum(1 for x, y in zip(fa, fb) if x and y)
    union = sum(1 for x, y in zip(fa, fb) if x or y)
    if union == 0:
        return 1.0
    return inter / union


def naive_boundary(mask):
    """Set of (row, col) foreground pixels with a 4-neighbor outside the
    foreground; outside the image counts as background."""
    m = [[bool(v) for v in row] for row in mask]
    h = len(m)
    w = len(m[0])
    out = set()
    for r in range(h):
        for c in range(w):
            if not m[r][c]:
                continue
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                rr, cc = r + dr, c + dc
                if rr < 0 or rr >= h or cc < 0 or cc >= w or not m[rr][cc]:
                    out.add((r, c))
                    break
    return out


def naive_hd95(a, b, spacing=(1.0, 1.0)):
    am = [[bool(v) for v in row] for row in a]
    bm = [[bool(v) for v in row] for row in b]
    sy, sx = float(spacing[0]), float(spacing[1])
    ea = any(any(row) for row in am)
    eb = any(any(row) for row in bm)
    if not ea and not eb:
        return 0.0, "both-empty"
    if ea != eb:
        h = len(am)
        w = len(am[0])
        return math.hypot(h * sy, w * sx), "one-empty"
    ba = sorted(naive_boundary(am))
    bb = sorted(naive_boundary(bm))

    def to_nearest(points, targets):
        ds = []
        for (r, c) in points:
            best = math.inf
            for (tr, tc) in targets:
                d2 = (sy * (r - tr)) ** 2 + (sx * (c - tc)) ** 2
                if d2 < best:
                    best = d2
            ds.append(math.sqrt(best))
        return ds

    pooled = to_nearest(ba, bb) + to_nearest(bb, ba)
    return naive_percentile(pooled, 95.0), None


# ---------------------------------------------------------------------------
# file parsing (own readers, no package imports)

_HEADER = struct.Struct("<4sHHII")


def read_map_file(path):
    """Parse a probability-map file; returns (width, height, flat floats)."""
    data = Path(path).read_bytes()
    magic, version, reserved, width, height = _HEADER.unpack(data[:16])
    if magic != b"SPFM" or version != 1 or reserved != 0:
        raise ValueError(f"{path}: bad header {magic!r} v{version} r{reserved}")
    n = width * height
    payload = data[16:16 + 4 * n]
    if len(payload) != 4 * n or len(data) != 16 + 4 * n + 4:
        raise ValueError(f"{path}: truncated")
    (crc,) = struct.unpack("<I", data[16 + 4 * n:])
    if zlib.crc32(payload) != crc:
        raise ValueError(f"{path}: checksum mismatch")
    return width, height, list(struct.unpack(f"<{n}f", payload))


def read_mask_file(path):
    """Parse a binary-mask file; returns (width, height, flat 0/1 ints)."""
    data = Path(path).read_bytes()
    magic, version, reserved, width, height = _HEADER.unpack(data[:16])
    if magic != b"SBMK" or version != 1 or reserved != 0:
        raise ValueError(f"{path}: bad header {magic!r} v{version} r{reserved}")
    n = width * height
    payload = data[16:16 + n]
    if len(payload) != n or len(data) != 16 + n + 4:
        raise ValueError(f"{path}: truncated")
    (crc,) = struct.unpack("<I", data[16 + n:])
    if zlib.crc32(payload) != crc:
        raise ValueError(f"{path}: checksum mismatch")
    vals = list(payload)
    if any(v not in (0, 1) for v in vals):
        raise ValueError(f"{path}: non-binary payload")
    return width, height, vals


def parse_manifest_file(path):
    """Parse a map manifest; returns (headers dict, record dicts)."""
    headers = {}
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, val = body.split("=", 1)
                headers[key.strip()] = val.strip()
            continue
        parts = line.split("\t")
        if len(parts) != 9:
            raise ValueError(f"{path}: expected 9 fields, got {len(parts)}")
        records.append({
            "image_id": parts[0], "i": int(parts[1]), "k": int(parts[2]),
            "x1": float(parts[3]), "y1": float(parts[4]),
            "x2": float(parts[5]), "y2": float(parts[6]),
            "path": parts[7], "crc32": parts[8],
        })
    return headers, records


# ---------------------------------------------------------------------------
# end-to-end naive re-evaluation from cached maps

def raster_range(x1, y1, x2, y2, width, height):
    """Pixel-center rasterization: (x0, y0, x_end, y_end)."""
    x0 = max(0, math.ceil(x1 - 0.5))
    y0 = max(0, math.ceil(y1 - 0.5))
    x_end = min(width, math.ceil(x2 - 0.5))
    y_end = min(height, math.ceil(y2 - 0.5))
    return x0, y0, x_end, y_end


def naive_reevaluate(image_dir, cfg):
    """Recompute the whole decision stage from an image's cached maps.

    cfg is a plain dict with keys eps, lam, gamma, a_min, a_max,
    tau_min, tau_max, tau_margin, m_grid, top_n. Returns a dict with
    taus, provenance, tau_star, selected, weights, uniform_fallback,
    fused (flat float64) and mask (flat 0/1 ints).
    """
    image_dir = Path(image_dir)
    headers, records = parse_manifest_file(image_dir / "manifest.txt")
    by_cand = {}
    for rec in records:
        by_cand.setdefault(rec["i"], {})[rec["k"]] = rec
    indices = sorted(by_cand)

    maps = {}
    width = height = None
    for i in indices:
        for k in sorted(by_cand[i]):
            rec = by_cand[i][k]
            p = Path(rec["path"])
            if not p.is_absolute():
                p = image_dir / p
            w, h, vals = read_map_file(p)
            if width is None:
                width, height = w, h
            elif (w, h) != (width, height):
                raise ValueError(f"{p}: dimension mismatch")
            maps[(i, k)] = vals
    npx = width * height

    base = indices[0]
    bx0, by0, bxe, bye = raster_range(
        by_cand[base][1]["x1"], by_cand[base][1]["y1"],
        by_cand[base][1]["x2"], by_cand[base][1]["y2"], width, height)
    base_map = maps[(base, 1)]
    region = [base_map[r * width + c]
              for r in range(by0, bye) for c in range(bx0, bxe)]
    taus, provenance = naive_threshold_set(region, cfg)

    score = {}
    for i in indices:
        ks = sorted(by_cand[i])
        k = len(ks)
        cand_maps = [maps[(i, kk)] for kk in ks]
        rec1 = by_cand[i][1]
        cx0, cy0, cxe, cye = raster_range(rec1["x1"], rec1["y1"],
                                          rec1["x2"], rec1["y2"],
                                          width, height)
        area = max(0, cxe - cx0) * max(0, cye - cy0)
        box_px = [r * width + c
                  for r in range(cy0, cye) for c in range(cx0, cxe)]
        for ti, tau in enumerate(taus):
            masks = [[1 if v > tau else 0 for v in mp] for mp in cand_maps]
            counts = [sum(col) for col in zip(*masks)]
            s_total = sum(counts)
            sious = []
            for m in masks:
                a = sum(cv for mv, cv in zip(m, counts) if mv)
                msize = sum(m)
                num = a / k
                den = msize + (s_total - a) / k + cfg["eps"]
                sious.append(num / den)
            in_box = sum(counts[px] for px in box_px)
            occ = in_box / (k * area)
            mu = math.fsum(sious) / k
            sigma = math.sqrt(math.fsum((v - mu) ** 2 for v in sious) / k)
            sc = mu - cfg["lam"] * sigma
            gate = 1.0 if (cfg["a_min"] < occ < cfg["a_max"]) else cfg["gamma"]
            score[(i, ti)] = sc * gate

    best_tau = None
    best_mean = -math.inf
    for ti, tau in enumerate(taus):
        mean = math.fsum(score[(i, ti)] for i in indices) / len(indices)
        if mean > best_mean:
            best_mean = mean
            best_tau = tau
    ti_star = taus.index(best_tau)

    col = {i: score[(i, ti_star)] for i in indices}
    ranked = sorted(col, key=lambda i: (-col[i], i))
    selected = ranked[:min(cfg["top_n"], len(ranked))]

    sel_scores = [col[i] for i in selected]
    total = math.fsum(sel_scores)
    uniform = total <= 0.0 or any(s < 0.0 for s in sel_scores)
    if uniform:
        weights = [1.0 / len(selected)] * len(selected)
    else:
        weights = [s / total for s in sel_scores]

    fused = [0.0] * npx
    for i, wgt in zip(selected, weights):
        ks = sorted(by_cand[i])
        acc = [0.0] * npx
        for kk in ks:
            acc = [a + v for a, v in zip(acc, maps[(i, kk)])]
        avg = [a / len(ks) for a in acc]
        fused = [f + wgt * v for f, v in zip(fused, avg)]
    mask = [1 if v > best_tau else 0 for v in fused]

    return {
        "width": width, "height": height,
        "taus": taus, "provenance": provenance, "tau_star": best_tau,
        "selected": selected, "weights": weights,
        "uniform_fallback": uniform, "fused": fused, "mask": mask,
    }
