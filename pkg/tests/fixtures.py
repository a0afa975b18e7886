"""Hand-assembled binary fixtures for the parser tests.

Everything here builds bytes directly with struct.pack from the on-disk
layouts (ZIP local/central/EOCD records, binary-XML chunks), so the test
fixtures do not depend on the code under test. raw_zip() is a from-scratch
ZIP writer; zipfile-based builders live in the tests that want them.
"""

import struct
import zlib

# binary-XML chunk types
AXML_FILE = 0x0003
STRING_POOL = 0x0001
RESOURCE_MAP = 0x0180
START_NAMESPACE = 0x0100
END_NAMESPACE = 0x0101
START_ELEMENT = 0x0102
END_ELEMENT = 0x0103
CDATA = 0x0104

UTF8_FLAG = 1 << 8
NO_RAW = 0xFFFFFFFF

TYPE_REFERENCE = 0x01
TYPE_STRING = 0x03
TYPE_INT_DEC = 0x10
TYPE_INT_HEX = 0x11
TYPE_BOOLEAN = 0x12


def _encode_utf16(s):
    data = s.encode("utf-16-le")
    units = len(data) // 2
    if units < 0x8000:
        head = struct.pack("<H", units)
    else:
        head = struct.pack("<HH", 0x8000 | (units >> 16), units & 0xFFFF)
    return head + data + b"\x00\x00"


def _encode_utf8(s):
    data = s.encode("utf-8")

    def length(n):
        if n < 0x80:
            return bytes([n])
        return bytes([0x80 | (n >> 8), n & 0xFF])

    return length(len(s)) + length(len(data)) + data + b"\x00"


def pool_chunk(strings, utf8=False, flags_extra=0):
    """String-pool chunk: header, offset table, packed string data."""
    encode = _encode_utf8 if utf8 else _encode_utf16
    blobs = [encode(s) for s in strings]
    offsets = []
    at = 0
    for blob in blobs:
        offsets.append(at)
        at += len(blob)
    data = b"".join(blobs)
    while len(data) % 4:
        data += b"\x00"
    header = 28
    strings_start = header + 4 * len(strings)
    size = strings_start + len(data)
    flags = (UTF8_FLAG if utf8 else 0) | flags_extra
    out = struct.pack("<HHIIIIII", STRING_POOL, header, size,
                      len(strings), 0, flags, strings_start, 0)
    out += b"".join(struct.pack("<I", off) for off in offsets)
    out += data
    return out


def start_element(name_idx, attrs=(), ns_idx=NO_RAW, line=1):
    """attrs: iterable of (name_idx, raw_idx, dtype, data) tuples."""
    body = struct.pack("<IIHHHHHH", ns_idx, name_idx, 20, 20, len(attrs),
                       0, 0, 0)
    for aname, raw, dtype, data in attrs:
        body += struct.pack("<IIIHBBI", NO_RAW, aname, raw, 20, 0, dtype, data)
    size = 16 + len(body)
    return struct.pack("<HHIII", START_ELEMENT, 16, size, line, NO_RAW) + body


def string_attr(name_idx, value_idx, via_raw=False):
    """Attribute carrying a pool string, through either value route."""
    if via_raw:
        return (name_idx, value_idx, TYPE_STRING, value_idx)
    return (name_idx, NO_RAW, TYPE_STRING, value_idx)


def end_element(name_idx=0, ns_idx=NO_RAW, line=1):
    return struct.pack("<HHIIIII", END_ELEMENT, 16, 24, line, NO_RAW,
                       ns_idx, name_idx)


def namespace_chunk(start, prefix_idx, uri_idx):
    ctype = START_NAMESPACE if start else END_NAMESPACE
    return struct.pack("<HHIIIII", ctype, 16, 24, 1, NO_RAW, prefix_idx, uri_idx)


def resource_map(ids):
    return struct.pack("<HHI", RESOURCE_MAP, 8, 8 + 4 * len(ids)) + \
        b"".join(struct.pack("<I", i) for i in ids)


def axml(*chunks):
    body = b"".join(chunks)
    return struct.pack("<HHI", AXML_FILE, 8, 8 + len(body)) + body


def manifest_axml(permissions, utf8=False, via_raw=False):
    """Realistic manifest: namespace + manifest element wrapping one
    uses-permission element per name, each carrying a name attribute."""
    strings = ["name", "manifest", "uses-permission", "android",
               "http://schemas.android.com/apk/res/android"]
    base = len(strings)
    strings = strings + list(permissions)
    chunks = [
        pool_chunk(strings, utf8=utf8),
        resource_map([0x01010003]),
        namespace_chunk(True, 3, 4),
        start_element(1),
    ]
    for i in range(len(permissions)):
        chunks.append(start_element(2, [string_attr(0, base + i, via_raw)]))
        chunks.append(end_element(2))
    chunks.append(end_element(1))
    chunks.append(namespace_chunk(False, 3, 4))
    return axml(*chunks)


# -- from-scratch ZIP writer --------------------------------------------------

def raw_zip(entries, comment=b"", deflate=(), flags=0):
    """Write a ZIP archive by hand.

    entries: list of (name, payload) pairs; names in `deflate` get method 8,
    the rest are stored. `flags` goes into both header records verbatim.
    """
    blob = b""
    central = b""
    for name, payload in entries:
        raw_name = name.encode("utf-8")
        if name in deflate:
            method = 8
            stored = zlib.compress(payload, 6)[2:-4]  # strip zlib wrapper
        else:
            method = 0
            stored = payload
        crc = zlib.crc32(payload) & 0xFFFFFFFF
        offset = len(blob)
        blob += struct.pack("<IHHHHHIII", 0x04034B50, 20, flags, method,
                            0, 0x21, crc, len(stored), len(payload))
        blob += struct.pack("<HH", len(raw_name), 0)
        blob += raw_name + stored
        central += struct.pack("<IHHHHHHIIIHHHHHII", 0x02014B50, 20, 20,
                               flags, method, 0, 0x21, crc, len(stored),
                               len(payload), len(raw_name), 0, 0, 0, 0, 0,
                               offset)
        central += raw_name
    cd_start = len(blob)
    blob += central
    blob += struct.pack("<IHHHHIIH", 0x06054B50, 0, 0, len(entries),
                        len(entries), len(central), cd_start, len(comment))
    blob += comment
    return blob


def raw_apk(permissions, extra=(), utf8=False, deflate_manifest=False):
    """Hand-assembled APK: manifest plus optional filler entries."""
    manifest = manifest_axml(permissions, utf8=utf8)
    entries = [("AndroidManifest.xml", manifest)] + list(extra)
    deflate = ("AndroidManifest.xml",) if deflate_manifest else ()
    return raw_zip(entries, deflate=deflate)
