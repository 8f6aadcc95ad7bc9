"""Binary PPM output and the chaos game representation of data strings."""

import numpy as np

from .errors import InvalidInput
from .hyperspace import PointCloud
from .ifs_core import SIERPINSKI_VERTICES, midpoint_ifs

# Corner order follows the usual DNA layout for "ACGT": A, C, G, T.
CGR_VERTICES = {
    2: ((0.0, 0.5), (1.0, 0.5)),
    3: SIERPINSKI_VERTICES,
    4: ((0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)),
}


def planar_coords(cloud):
    """Plane points as-is; sphere points through the chart ``z -> (Re z, Im z)`` with INF dropped."""
    if cloud.space == "plane":
        return np.asarray(cloud.points, dtype=float)
    z = cloud.points
    z = z[np.isfinite(z.real) & np.isfinite(z.imag)]
    return np.column_stack((z.real, z.imag))


def rasterize(xy, viewport, width, height):
    """Boolean ``(height, width)`` mask of hit pixels.

    Pixel column ``floor((x - xmin) / (xmax - xmin) * width)``, row
    ``floor((ymax - y) / (ymax - ymin) * height)``; anything landing outside
    ``[0, width) x [0, height)`` is clipped, so the right and bottom edges of
    the viewport are excluded.
    """
    xmin, xmax, ymin, ymax = viewport
    if not (xmax > xmin and ymax > ymin):
        raise InvalidInput(f"degenerate viewport {viewport}")
    if width < 1 or height < 1:
        raise InvalidInput("image size must be positive")
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    with np.errstate(invalid="ignore", over="ignore"):
        col = np.floor((xy[:, 0] - xmin) / (xmax - xmin) * width)
        row = np.floor((ymax - xy[:, 1]) / (ymax - ymin) * height)
    ok = (col >= 0) & (col < width) & (row >= 0) & (row < height)
    mask = np.zeros((height, width), dtype=bool)
    mask[row[ok].astype(np.int64), col[ok].astype(np.int64)] = True
    return mask


def ppm_bytes(mask):
    """P6, 8-bit: white background, black where ``mask`` is set."""
    h, w = mask.shape
    px = np.where(mask, 0, 255).astype(np.uint8)
    rgb = np.repeat(px[:, :, None], 3, axis=2)
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def write_ppm(path, mask):
    data = ppm_bytes(mask)
    with open(path, "wb") as fh:
        fh.write(data)


def read_ppm(path):
    """Inverse of :func:`write_ppm`: returns the boolean black-pixel mask."""
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6" or parts[2] != b"255":
        raise InvalidInput(f"{path} is not an 8-bit P6 image")
    w, h = (int(v) for v in parts[1].split())
    rgb = np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)
    return (rgb == 0).all(axis=2)


def default_viewport(cloud, margin=0.05):
    xy = planar_coords(cloud)
    if len(xy) == 0:
        return (-2.0, 2.0, -2.0, 2.0)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo, hi = lo - margin * span, hi + margin * span
    return (float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))


def encode(text, alphabet):
    """Map each character of ``text`` to its 1-based index in ``alphabet``.

    Line breaks are skipped; positions in errors are 1-based over the
    remaining characters.
    """
    index = {ch: i for i, ch in enumerate(alphabet, 1)}
    if len(index) != len(alphabet):
        raise InvalidInput(f"alphabet {alphabet!r} repeats a character")
    data = text.replace("\r", "").replace("\n", "")
    out = np.empty(len(data), dtype=np.int64)
    for pos, ch in enumerate(data):
        s = index.get(ch)
        if s is None:
            raise InvalidInput(f"unmapped character {ch!r} at position {pos + 1}")
        out[pos] = s
    return out


def cgr_orbit(symbols, n):
    """Data-driven chaos game on the ``n``-gon midpoint IFS, from the polygon centroid.

    Returns the ``len(symbols) + 1`` orbit points.
    """
    if n not in CGR_VERTICES:
        raise InvalidInput(f"built-in CGR layouts exist for 2, 3 or 4 symbols, not {n}")
    verts = np.asarray(CGR_VERTICES[n])
    f = midpoint_ifs(CGR_VERTICES[n])
    pts = np.empty((len(symbols) + 1, 2))
    x, y = verts.mean(axis=0)
    pts[0] = x, y
    coeffs = [(m.matrix, m.translation) for m in f.maps]
    for k, s in enumerate(np.asarray(symbols).tolist(), 1):
        (a, b, c, d), (e, g) = coeffs[s - 1]
        x, y = a * x + b * y + e, c * x + d * y + g
        pts[k] = x, y
    return PointCloud(pts, "plane")


def occupancy_histogram(xy, grid):
    """Counts on a ``grid x grid`` partition of the unit square, indexed ``[iy, ix]``.

    The closed top and right edges fall into the last row and column.
    """
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    ix = np.clip(np.floor(xy[:, 0] * grid), 0, grid - 1).astype(np.int64)
    iy = np.clip(np.floor(xy[:, 1] * grid), 0, grid - 1).astype(np.int64)
    hist = np.zeros((grid, grid), dtype=np.int64)
    np.add.at(hist, (iy, ix), 1)
    return hist


def histogram_csv(hist):
    lines = ["ix,iy,count"]
    g = hist.shape[0]
    for iy in range(g):
        for ix in range(hist.shape[1]):
            lines.append(f"{ix},{iy},{hist[iy, ix]}")
    return "\n".join(lines) + "\n"
