"""Approximate 3x3 degree target grids for the area examples.

Each area is a crude outline polygon. Grid rows are 3 degrees apart in
latitude with roughly 3 degrees of arc between neighbours along a row; the
points inside the outline closest to its centroid are kept until the target
count is reached. The outlines are hand-drawn, so the grids only resemble the
real regions.
"""

import csv
import math
import pathlib

AREAS = {
    # name: (count, outline as (lat, lon) vertices)
    "antarctica": (94, [(-61.0, -60.0), (-67.0, -75.0), (-70.0, -100.0), (-72.0, -140.0),
                        (-74.0, -160.0), (-75.0, 165.0), (-68.0, 165.0), (-64.0, 140.0),
                        (-63.0, 100.0), (-64.0, 60.0), (-66.0, 20.0), (-67.0, -10.0),
                        (-72.0, -30.0), (-74.0, -50.0), (-65.0, -60.0)]),
    "amazon": (56, [(4.0, -74.0), (2.0, -66.0), (3.0, -60.0), (0.0, -50.0), (-8.0, -48.0),
                    (-16.0, -52.0), (-19.0, -62.0), (-16.0, -68.0), (-12.0, -74.0),
                    (-6.0, -79.0), (0.0, -79.0)]),
    "nile": (30, [(31.0, 30.0), (31.0, 33.0), (22.0, 35.0), (15.0, 39.0), (9.0, 39.0),
                  (3.0, 36.0), (-4.0, 35.0), (-3.0, 29.0), (4.0, 28.0), (9.0, 24.0),
                  (16.0, 28.0), (23.0, 30.0)]),
}


def inside(lat, lon, poly):
    """Even-odd test in (lon, lat) coordinates; south-polar outlines are
    handled by testing the latitude against the outline edge below the pole."""
    if all(p[0] < -60.0 for p in poly):
        # Polar cap: inside when south of the interpolated boundary latitude.
        pts = sorted(((p[1] % 360.0, p[0]) for p in poly))
        pts = [(pts[-1][0] - 360.0, pts[-1][1])] + pts + [(pts[0][0] + 360.0, pts[0][1])]
        x = lon % 360.0
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x0 <= x <= x1:
                edge = y0 + (y1 - y0) * (x - x0) / (x1 - x0) if x1 > x0 else y0
                return lat <= edge
        return False
    c = False
    n = len(poly)
    for k in range(n):
        (y0, x0), (y1, x1) = poly[k], poly[(k + 1) % n]
        if (y0 > lat) != (y1 > lat):
            if lon < x0 + (lat - y0) * (x1 - x0) / (y1 - y0):
                c = not c
    return c


def candidates(poly):
    lats = [p[0] for p in poly]
    lat = math.floor(min(lats) / 3.0) * 3.0 + 1.5
    out = []
    while lat <= max(lats):
        per_row = max(1, round(120 * math.cos(math.radians(lat))))
        for k in range(per_row):
            lon = -180.0 + (k + 0.5) * 360.0 / per_row
            if inside(lat, lon, poly):
                out.append((round(lat, 3), round(lon, 3)))
        lat += 3.0
    return out


def centroid(points):
    xs = [math.cos(math.radians(a)) * math.cos(math.radians(b)) for a, b in points]
    ys = [math.cos(math.radians(a)) * math.sin(math.radians(b)) for a, b in points]
    zs = [math.sin(math.radians(a)) for a, _ in points]
    x, y, z = (sum(v) / len(v) for v in (xs, ys, zs))
    return math.degrees(math.atan2(z, math.hypot(x, y))), math.degrees(math.atan2(y, x))


def arc(p, q):
    a1, b1, a2, b2 = map(math.radians, (*p, *q))
    c = math.sin(a1) * math.sin(a2) + math.cos(a1) * math.cos(a2) * math.cos(b1 - b2)
    return math.acos(max(-1.0, min(1.0, c)))


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "scenarios" / "grids"
    out.mkdir(parents=True, exist_ok=True)
    for name, (count, poly) in AREAS.items():
        pts = candidates(poly)
        if len(pts) < count:
            raise SystemExit(f"{name}: only {len(pts)} candidates for {count} points")
        c = centroid(pts)
        pts = sorted(pts, key=lambda p: (arc(p, c), p))[:count]
        pts.sort()
        with open(out / f"{name}.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["lat_deg", "lon_deg"])
            w.writerows(pts)
        print(f"{name}: {len(pts)} points")


if __name__ == "__main__":
    main()
