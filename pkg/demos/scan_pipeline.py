#!/usr/bin/env python3
"""End-to-end triage walkthrough on toy APKs built in this script.

Builds two minimal APKs (a benign-looking one and an SMS-abusing one) with a
tiny binary-XML writer, trains a forest on a synthetic permission corpus
whose schema matches, and scans both files the same way the CLI would. The
APKs and the model land in demos/out/.
"""

import struct
import zipfile
from pathlib import Path

import numpy as np

from apktriage.apkparse import extract_permissions, vectorize
from apktriage.core import Dataset, Label, PermissionSchema
from apktriage.models import default_spec, predict, train
from apktriage.models.serialize import save_model
from apktriage.rng import Rng

OUT = Path(__file__).resolve().parent / "out"

PERMS = (
    "android.permission.INTERNET",
    "android.permission.ACCESS_NETWORK_STATE",
    "android.permission.READ_SMS",
    "android.permission.SEND_SMS",
    "android.permission.RECEIVE_BOOT_COMPLETED",
    "android.permission.READ_CONTACTS",
)
ANDROID_NS = "http://schemas.android.com/apk/res/android"


def axml_manifest(permissions) -> bytes:
    """Binary AndroidManifest.xml requesting the given permissions."""
    pool = ["name", "manifest", "uses-permission", ANDROID_NS] + list(permissions)

    def chunk(ctype: int, body: bytes, header_extra: bytes = b"") -> bytes:
        header = struct.pack("<HHI", ctype, 8 + len(header_extra),
                             8 + len(header_extra) + len(body))
        return header + header_extra + body

    # string pool, UTF-16 flavor: offsets, then u16 length + data + null
    blobs, offsets, at = [], [], 0
    for s in pool:
        data = s.encode("utf-16-le")
        blob = struct.pack("<H", len(s)) + data + b"\x00\x00"
        offsets.append(at)
        blobs.append(blob)
        at += len(blob)
    body = b"".join(blobs)
    body += b"\x00" * (-len(body) % 4)
    strings_start = 28 + 4 * len(pool)
    pool_extra = struct.pack("<IIIII", len(pool), 0, 0, strings_start, 0)
    pool_chunk = chunk(0x0001, struct.pack("<%dI" % len(pool), *offsets) + body,
                       pool_extra)

    def element(name_idx: int, attrs=()) -> bytes:
        head = struct.pack("<II", 0xFFFFFFFF, name_idx)
        head += struct.pack("<HHHHHH", 20, 20, len(attrs), 0, 0, 0)
        packed = b"".join(
            struct.pack("<IIIHBBI", 3, 0, value_idx, 8, 0, 0x03, value_idx)
            for value_idx in attrs)
        return chunk(0x0102, head + packed, struct.pack("<II", 1, 0xFFFFFFFF))

    def end_element(name_idx: int) -> bytes:
        return chunk(0x0103, struct.pack("<II", 0xFFFFFFFF, name_idx),
                     struct.pack("<II", 1, 0xFFFFFFFF))

    parts = [element(1)]
    for i in range(len(permissions)):
        parts.append(element(2, attrs=(4 + i,)))
        parts.append(end_element(2))
    parts.append(end_element(1))
    payload = pool_chunk + b"".join(parts)
    return struct.pack("<HHI", 0x0003, 8, 8 + len(payload)) + payload


def build_apk(path: Path, permissions) -> None:
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("AndroidManifest.xml", axml_manifest(permissions))
        zf.writestr("classes.dex", b"\x00" * 64)


def training_corpus(seed: int = 7, n: int = 600) -> Dataset:
    """Synthetic corpus: SMS permissions mark malware, with some noise."""
    rng = Rng(seed)
    schema = PermissionSchema(PERMS)
    sms = (PERMS.index("android.permission.READ_SMS"),
           PERMS.index("android.permission.SEND_SMS"))
    x = np.zeros((n, len(PERMS)), dtype=np.uint8)
    y = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        for j in range(len(PERMS)):
            x[i, j] = rng.uniform_index(2)
        label = 1 if (x[i, sms[0]] or x[i, sms[1]]) else 0
        if rng.next_float53() < 0.03:
            label = 1 - label
        y[i] = label
    return Dataset(schema, x, y)


def main() -> None:
    OUT.mkdir(exist_ok=True)
    benign_apk = OUT / "weather_widget.apk"
    shady_apk = OUT / "free_flashlight.apk"
    build_apk(benign_apk, ["android.permission.INTERNET",
                           "android.permission.ACCESS_NETWORK_STATE"])
    build_apk(shady_apk, ["android.permission.INTERNET",
                          "android.permission.SEND_SMS",
                          "android.permission.READ_CONTACTS",
                          "com.weird.vendor.BACKDOOR"])

    ds = training_corpus()
    model = train(default_spec("rf", seed=11, n_estimators=25, max_depth=6),
                  ds, np.arange(len(ds)))
    save_model(model, OUT / "scan_model.txt")
    print("trained rf on %d synthetic rows, %d permissions" % (len(ds), len(PERMS)))

    for apk in (benign_apk, shady_apk):
        perms = extract_permissions(apk.read_bytes())
        bits, unknown = vectorize(perms, model.schema)
        label, score = predict(model, bits)
        verdict = "MALICIOUS" if label is Label.MALICIOUS else "BENIGN"
        print("\n%s -> %s (score %.3f)" % (apk.name, verdict, score))
        for p in sorted(perms):
            print("   %s" % p)
        if unknown:
            print("   (not in schema: %s)" % ", ".join(unknown))


if __name__ == "__main__":
    main()
