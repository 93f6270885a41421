#!/usr/bin/env python3
"""Line-protocol detector stand-in for tests.

Reads image paths on stdin and answers each with one landmark record. The
first argument picks a behaviour: ok, hang:<substring>, garbage, wrong-id,
exit-nonzero, extra, die-after:<n>.
"""
import json
import sys
import time

mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
handled = 0
for raw in sys.stdin:
    path = raw.rstrip("\n")
    handled += 1
    if mode.startswith("hang:") and mode[5:] in path:
        time.sleep(60)
    if mode.startswith("die-after:") and handled > int(mode[10:]):
        sys.exit(0)
    if mode == "garbage":
        print("this is not json", flush=True)
        continue
    ident = path + ".other" if mode == "wrong-id" else path
    faces = [] if path.endswith("noface.png") else [
        {"left_eye": [[38, 45], [40, 45]], "right_eye": [[61, 44], [63, 46]]}
    ]
    rec = {"image_id": ident, "width": 100, "height": 100, "detector": "fake", "faces": faces}
    print(json.dumps(rec), flush=True)
if mode == "extra":
    print(json.dumps({"image_id": "bonus", "width": 1, "height": 1, "detector": "fake", "faces": []}), flush=True)
sys.exit(3 if mode == "exit-nonzero" else 0)
