#!/usr/bin/env python3
"""Convert torchvision's pretrained VGG19 features into the weight archive the
perceptual and style losses load (`edgesr train --extractor <file>`).

Run this on a machine with torch/torchvision installed and an internet
connection (the pretrained download), then copy the output file over:

    python tools/export_vgg19.py vgg19_features.ckpt
"""

import argparse
import json
import struct
import sys

# Torchvision layer indices of the 13 convolutions up to conv5_1, in the order
# the extractor's plan expects them.
CONV_INDICES = {
    "conv1_1": 0, "conv1_2": 2,
    "conv2_1": 5, "conv2_2": 7,
    "conv3_1": 10, "conv3_2": 12, "conv3_3": 14, "conv3_4": 16,
    "conv4_1": 19, "conv4_2": 21, "conv4_3": 23, "conv4_4": 25,
    "conv5_1": 28,
}

MAGIC = b"EDGESR01"


def write_archive(path, tensors, meta):
    """tensors: {name: (shape tuple, float32 bytes)}; layout mirrors the C++
    reader: magic, u64 header length, JSON header, payload in name order."""
    header = {"format_version": 1, "meta": meta, "tensors": []}
    offset = 0
    for name in sorted(tensors):
        shape, raw = tensors[name]
        header["tensors"].append(
            {"name": name, "dtype": "f32", "shape": list(shape), "offset": offset}
        )
        offset += len(raw)
    header_text = json.dumps(header, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as out:
        out.write(MAGIC)
        out.write(struct.pack("<Q", len(header_text)))
        out.write(header_text)
        for name in sorted(tensors):
            out.write(tensors[name][1])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output", help="archive file to write")
    args = parser.parse_args()

    try:
        import torch
        from torchvision.models import VGG19_Weights, vgg19
    except ImportError as exc:
        sys.exit(f"export_vgg19: torch/torchvision required: {exc}")

    features = vgg19(weights=VGG19_Weights.IMAGENET1K_V1).features.eval()
    tensors = {}
    for name, idx in CONV_INDICES.items():
        conv = features[idx]
        if not isinstance(conv, torch.nn.Conv2d):
            sys.exit(f"export_vgg19: layer {idx} is not a convolution; "
                     "torchvision layout changed")
        w = conv.weight.detach().to(torch.float32).contiguous()
        b = conv.bias.detach().to(torch.float32).contiguous()
        tensors[f"{name}.weight"] = (tuple(w.shape), w.numpy().tobytes())
        tensors[f"{name}.bias"] = (tuple(b.shape), b.numpy().tobytes())

    write_archive(args.output, tensors,
                  {"kind": "vgg19_features", "source": "torchvision IMAGENET1K_V1"})
    print(f"wrote {args.output} ({len(tensors)} tensors)")


if __name__ == "__main__":
    main()
