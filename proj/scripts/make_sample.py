#!/usr/bin/env python3
"""Generate the bundled sample dataset and the small fixtures used by tests.

Writes data/sample (3 slides with rasters, transcripts, ground truth, a
manifest, a provider config and a scripted LLM reply table covering both
LLM methods) and data/single_line.
The expected llm-select result is computed here from the reply table, not by
running the C++ pipeline, so it serves as an independent oracle.

Run from the repository root: python3 scripts/make_sample.py
"""

import hashlib
import json
import os
import sys

from PIL import Image, ImageDraw, ImageFont

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SAMPLE = os.path.join(ROOT, "data", "sample")
SINGLE = os.path.join(ROOT, "data", "single_line")
GOLDEN = os.path.join(ROOT, "tests", "golden")

SLIDES = [
    {
        "slide_id": "s1",
        "size": (1280, 720),
        "regions": [
            ("R1", "textual", [0.08, 0.05, 0.84, 0.12], "Aligning Speech with Slides"),
            ("R2", "textual", [0.08, 0.22, 0.52, 0.12], "Lecture videos pair spoken narration with dense slides"),
            ("R3", "textual", [0.08, 0.38, 0.52, 0.12], "Viewers lose track of which region the speaker means"),
            ("R4", "visual", [0.64, 0.22, 0.30, 0.45], ""),
            ("R5", "textual", [0.08, 0.56, 0.52, 0.10], "Goal: highlight the region being discussed"),
        ],
        "lines": [
            ("L1", 0.0, 4.2, "Aligning speech with slides."),
            ("L2", 4.2, 9.8, "Lecture videos pair spoken narration with dense slides"),
            ("L3", 9.8, 15.1, "and viewers often lose track of which region the speaker means"),
            ("L4", 15.1, 19.0, "as you can see in this figure here"),
            ("L5", 19.0, 24.6, "so our goal is to hilight the region being discussed"),
        ],
        "gt": {"L1": ["R1"], "L2": ["R2"], "L3": ["R3"], "L4": ["R4"], "L5": ["R5"]},
        "select": {"L1": "R1", "L2": "R2", "L3": "R3", "L4": "none", "L5": "R5, R1"},
    },
    {
        "slide_id": "s2",
        "size": (1280, 720),
        "regions": [
            ("R1", "textual", [0.06, 0.04, 0.88, 0.11], "Fuzzy and Semantic Matching"),
            ("R2", "textual", [0.06, 0.20, 0.50, 0.10], "Fuzzy: token ratio over normalized text"),
            ("R3", "textual", [0.06, 0.34, 0.50, 0.10], "Semantic: cosine similarity of sentence embeddings"),
            ("R4", "textual", [0.06, 0.48, 0.50, 0.10], "LLM: ask whether a region is relevant"),
            ("R5", "visual", [0.60, 0.20, 0.34, 0.40], "Threshold T-1 0.8 T-2 0.7 T-3 0.6"),
        ],
        "lines": [
            ("L1", 0.0, 3.5, "we compare fuzzy and semantic matching"),
            ("L2", 3.5, 8.0, "fuzzy matching uses a token ratio over normalized text"),
            ("L3", 8.0, 13.2, "semantic matching uses cosine similarity of sentence embedings"),
            ("L4", 13.2, 18.4, "or we simply ask a language model whether a region is relevant"),
            ("L5", 18.4, 23.0, "the thresholds are listed in this table"),
        ],
        "gt": {"L1": ["R1", "R2", "R3"], "L2": ["R2"], "L3": ["R3"], "L4": ["R4"], "L5": ["R5"]},
        "select": {"L1": "R1", "L2": "[R2]", "L3": "R3", "L4": "R4", "L5": "R5"},
    },
    {
        "slide_id": "s3",
        "size": (1024, 768),
        "regions": [
            ("R1", "textual", [0.08, 0.05, 0.84, 0.10], "Results"),
            ("R2", "textual", [0.08, 0.20, 0.48, 0.10], "Fuzzy matching has high correctness"),
            ("R3", "textual", [0.08, 0.34, 0.48, 0.10], "Embeddings recover paraphrased content"),
            ("R4", "visual", [0.60, 0.20, 0.32, 0.42], ""),
            ("R5", "textual", [0.30, 0.80, 0.40, 0.10], "Thank you"),
        ],
        "lines": [
            ("L1", 0.0, 2.5, "now the results"),
            ("L2", 2.5, 7.0, "fuzzy matching has very high correctness"),
            ("L3", 7.0, 12.5, "while embeddings recover paraphrased content"),
            ("L4", 12.5, 16.0, "the chart on the right shows the naïve baseline"),
            ("L5", 16.0, 19.0, "thank you"),
        ],
        "gt": {"L1": ["R1"], "L2": ["R2"], "L3": ["R3"], "L4": ["R4"], "L5": ["R5"]},
        "select": {"L1": "R1", "L2": "R2", "L3": "R3", "L4": "none", "L5": "R5"},
    },
]


def dump(obj, path):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


def words_of(text, t0, t1):
    toks = text.split()
    step = (t1 - t0) / len(toks)
    return [{"w": w, "s": round(t0 + k * step, 3), "e": round(t0 + (k + 1) * step, 3)} for k, w in enumerate(toks)]


def draw_slide(slide, path):
    w, h = slide["size"]
    img = Image.new("RGB", (w, h), (250, 250, 246))
    d = ImageDraw.Draw(img)
    font = ImageFont.load_default()
    for rid, kind, (x, y, bw, bh), text in slide["regions"]:
        box = [x * w, y * h, (x + bw) * w, (y + bh) * h]
        if kind == "visual":
            d.rectangle(box, fill=(205, 220, 235), outline=(90, 110, 140))
            d.line([box[0], box[3], box[2], box[1]], fill=(90, 110, 140), width=3)
        if text:
            d.text((box[0] + 6, box[1] + 6), text.encode("ascii", "replace").decode(), fill=(20, 20, 20), font=font)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    img.save(path, optimize=False)


def select_prompt(line, regions):
    p = 'Transcript: "' + line + '"\nSlide regions:\n'
    for rid, _kind, _bbox, text in regions:
        p += "[" + rid + "] " + text + "\n"
    return p + 'List the ids of all relevant regions, comma-separated, or "none".'


def yes_no_prompt(line, region_text):
    return ('Transcript: "' + line + '"\nSlide region: "' + region_text +
            '"\nIs the slide region relevant to the transcript? Answer Yes or No.')


def parse_reply(reply, offered_ids):
    bare = reply.strip().lower().rstrip(".!")
    if bare in ("", "none"):
        return set()
    return {p.strip().strip("[]") for p in reply.replace("\n", ",").split(",") if p.strip()} & set(offered_ids)


def main():
    entries = []
    script = {}
    for s in SLIDES:
        sid = s["slide_id"]
        regions = [{"id": r, "kind": k, "bbox": b, "text": t} for r, k, b, t in s["regions"]]
        dump({"slide_id": sid, "image_path": f"images/{sid}.png", "image_size": list(s["size"]), "regions": regions},
             os.path.join(SAMPLE, "slides", f"{sid}.json"))
        lines = []
        for k, (lid, t0, t1, text) in enumerate(s["lines"]):
            line = {"line_id": lid, "t_start": t0, "t_end": t1, "text": text}
            if k % 2 == 0:
                line["words"] = words_of(text, t0, t1)
            lines.append(line)
        dump({"slide_id": sid, "lines": lines}, os.path.join(SAMPLE, "transcripts", f"{sid}.json"))
        dump({"slide_id": sid, "lines": s["gt"]}, os.path.join(SAMPLE, "gt", f"{sid}.json"))
        draw_slide(s, os.path.join(SAMPLE, "images", f"{sid}.png"))
        entries.append({"slide_id": sid, "slide": f"slides/{sid}.json", "transcript": f"transcripts/{sid}.json",
                        "ground_truth": f"gt/{sid}.json", "image": f"images/{sid}.png"})

        offered = [r for r in s["regions"] if r[3].strip()]
        expected = {}
        for lid, _t0, _t1, text in s["lines"]:
            reply = s["select"][lid]
            script[hashlib.sha256(select_prompt(text, offered).encode("utf-8")).hexdigest()] = reply
            for rid, _kind, _bbox, rtext in offered:
                answer = "Yes." if rid in s["gt"][lid] else "No"
                script[hashlib.sha256(yes_no_prompt(text, rtext).encode("utf-8")).hexdigest()] = answer
            chosen = parse_reply(reply, [r[0] for r in offered])
            expected[lid] = [{"region_id": r[0], "score": 1.0} for r in offered if r[0] in chosen]
        dump({"slide_id": sid, "matcher": "llm-select:scripted:llm_select_script.json", "lines": expected},
             os.path.join(GOLDEN, "llm_select", f"{sid}.json"))

    dump({"entries": entries, "metadata": {"name": "slidesync sample"}}, os.path.join(SAMPLE, "manifest.json"))
    dump(script, os.path.join(SAMPLE, "llm_select_script.json"))
    dump({"embedding": {"kind": "hashing", "vector_dim": 256},
          "llm": {"kind": "scripted", "script_path": "llm_select_script.json"}},
         os.path.join(SAMPLE, "providers.json"))

    # One line whose prediction equals its ground truth.
    dump({"slide_id": "f1", "image_size": [800, 600], "regions": [
        {"id": "R1", "kind": "textual", "bbox": [0.1, 0.1, 0.8, 0.1], "text": "Sparse attention"},
        {"id": "R2", "kind": "textual", "bbox": [0.1, 0.3, 0.35, 0.3], "text": "Local windows"},
        {"id": "R3", "kind": "visual", "bbox": [0.55, 0.3, 0.35, 0.3], "text": ""}]},
        os.path.join(SINGLE, "slide.json"))
    dump({"slide_id": "f1", "lines": [
        {"line_id": "L1", "t_start": 0.0, "t_end": 3.0, "text": "local windows as shown in the diagram"}]},
        os.path.join(SINGLE, "transcript.json"))
    dump({"slide_id": "f1", "lines": {"L1": ["R2", "R3"]}}, os.path.join(SINGLE, "gt.json"))
    dump({"slide_id": "f1", "matcher": "fixture", "lines": {"L1": [
        {"region_id": "R2", "score": 1.0}, {"region_id": "R3", "score": 1.0}]}},
        os.path.join(SINGLE, "pred", "f1.json"))
    os.makedirs(SINGLE, exist_ok=True)
    Image.new("RGB", (800, 600), (255, 255, 255)).save(os.path.join(SINGLE, "slide.png"))
    dump({"entries": [{"slide_id": "f1", "slide": "slide.json", "transcript": "transcript.json",
                       "ground_truth": "gt.json", "image": "slide.png"}]}, os.path.join(SINGLE, "manifest.json"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
