#!/usr/bin/env python3
# Example detector for `ganeye detect --provider exec`: finds the red/blue
# eye markers of a synthetic corpus. Reads one image path per line, writes one
# landmark record per line.
import json
import sys

import numpy as np
from PIL import Image
from scipy import ndimage


def centroids(mask):
    labels, n = ndimage.label(mask, structure=np.ones((3, 3)))
    return [(float(x), float(y)) for y, x in ndimage.center_of_mass(mask, labels, range(1, n + 1))]


for line in sys.stdin:
    path = line.rstrip("\n")
    rgb = np.asarray(Image.open(path).convert("RGB")).astype(int)
    red = centroids((rgb[..., 0] == 255) & (rgb[..., 1] == 0) & (rgb[..., 2] == 0))
    blue = centroids((rgb[..., 0] == 0) & (rgb[..., 1] == 0) & (rgb[..., 2] == 255))
    faces = []
    if len(red) == len(blue):
        for r in red:
            b = min(blue, key=lambda p: (p[0] - r[0]) ** 2 + (p[1] - r[1]) ** 2)
            left, right = sorted([r, b])
            faces.append({"left_eye": [list(left)], "right_eye": [list(right)]})
    h, w = rgb.shape[:2]
    print(json.dumps({"image_id": path, "width": w, "height": h, "detector": "marker-py", "faces": faces}), flush=True)
