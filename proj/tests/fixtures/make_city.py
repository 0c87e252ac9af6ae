#!/usr/bin/env python3
"""Regenerates city.geojson: a synthetic 2 km x 1.5 km street grid in GeoJSON,
shaped like an OpenStreetMap extract (buildings, roads, a park, a river)."""
import json
import math
import random

LAT0, LON0 = 40.7128, -74.0060
M_PER_DEG = 111320.0
PITCH = 120.0  # street spacing
X0, X1, Y0, Y1 = -1000.0, 1000.0, -750.0, 750.0

rng = random.Random(1234)


def lonlat(x, y):
    lon = LON0 + x / (math.cos(math.radians(LAT0)) * M_PER_DEG)
    lat = LAT0 + y / M_PER_DEG
    return [round(lon, 9), round(lat, 9)]


def ring(pts):
    out = [lonlat(x, y) for x, y in pts]
    return out + [out[0]]


features = []
names = iter(["City Hall", "Woolworth Building", "Municipal Tower", "Harbor Exchange",
              "Civic Library", "North Station", "Granite Bank", "Ferry Terminal"])
bid = 1000
for bx in range(int(X0 // PITCH), int(X1 // PITCH)):
    for by in range(int(Y0 // PITCH), int(Y1 // PITCH)):
        x0, y0 = bx * PITCH + 12, by * PITCH + 12
        if not (X0 <= x0 and x0 + 96 <= X1 and Y0 <= y0 and y0 + 96 <= Y1):
            continue
        if -300 < x0 < -60 and 100 < y0 < 350:
            continue  # park block
        if (bx, by) == (5, 3):
            continue  # courtyard house
        if y0 < -600:
            continue  # river
        for k in range(rng.choice([1, 2, 2, 3])):
            w, h = rng.uniform(18, 40), rng.uniform(18, 40)
            ox = x0 + (k % 2) * 50 + rng.uniform(0, 46 - min(w, 46)) if w < 46 else x0
            oy = y0 + (k // 2) * 50 + rng.uniform(0, 46 - min(h, 46)) if h < 46 else y0
            props = {"building": "yes"}
            r = rng.random()
            height = rng.choice([12, 25, 40, 60, 90, 150, 220, 300])
            if r < 0.5:
                props["height"] = str(height)
            elif r < 0.8:
                props["building:levels"] = str(max(1, height // 3))
            if rng.random() < 0.08:
                try:
                    props["name"] = next(names)
                except StopIteration:
                    pass
            if rng.random() < 0.15:
                # L-shaped footprint
                pts = [(ox, oy), (ox + w, oy), (ox + w, oy + h / 2), (ox + w / 2, oy + h / 2),
                       (ox + w / 2, oy + h), (ox, oy + h)]
            else:
                pts = [(ox, oy), (ox + w, oy), (ox + w, oy + h), (ox, oy + h)]
            features.append({"type": "Feature", "id": f"way/{bid}", "properties": props,
                             "geometry": {"type": "Polygon", "coordinates": [ring(pts)]}})
            bid += 1

# Courtyard building with a hole.
outer = [(612, 372), (700, 372), (700, 458), (612, 458)]
hole = [(640, 400), (640, 430), (672, 430), (672, 400)]
features.append({"type": "Feature", "id": "way/900", "properties": {"building": "yes", "height": "45", "name": "Courtyard House"},
                 "geometry": {"type": "Polygon", "coordinates": [ring(outer), ring(hole)]}})

features.append({"type": "Feature", "id": "way/50", "properties": {"leisure": "park", "name": "City Hall Park"},
                 "geometry": {"type": "Polygon", "coordinates": [ring([(-348, 108), (-12, 108), (-12, 348), (-348, 348)])]}})
features.append({"type": "Feature", "id": "way/51", "properties": {"natural": "water", "name": "River"},
                 "geometry": {"type": "Polygon", "coordinates": [ring([(X0 + 5, Y0 + 5), (X1 - 5, Y0 + 5), (X1 - 5, -620), (X0 + 5, -620)])]}})

rid = 100
for kx in range(int(X0 // PITCH) + 1, int(X1 // PITCH) + 1):
    x = kx * PITCH
    features.append({"type": "Feature", "id": f"way/{rid}", "properties": {"highway": "residential", "name": f"Avenue {kx}"},
                     "geometry": {"type": "LineString", "coordinates": [lonlat(x, -600), lonlat(x, Y1 - 5)]}})
    rid += 1
for ky in range(int(-600 // PITCH), int(Y1 // PITCH) + 1):
    y = ky * PITCH
    props = {"highway": "primary", "width": "14"} if ky == 0 else {"highway": "residential"}
    features.append({"type": "Feature", "id": f"way/{rid}", "properties": props,
                     "geometry": {"type": "LineString", "coordinates": [lonlat(X0 + 5, y), lonlat(X1 - 5, y)]}})
    rid += 1

features.append({"type": "Feature", "id": "node/7", "properties": {"amenity": "bench"},
                 "geometry": {"type": "Point", "coordinates": lonlat(5, 5)}})

with open("city.geojson", "w") as f:
    json.dump({"type": "FeatureCollection", "features": features}, f, indent=1)
    f.write("\n")
print(len(features), "features")
