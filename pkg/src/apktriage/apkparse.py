"""APK ingestion: ZIP container walking, binary-manifest decoding,
permission extraction and vectorization.

APK files are ZIP archives whose AndroidManifest.xml entry is stored in the
Android binary XML format (little-endian chunked records, strings interned
in a pool). Both parsers are written against hostile input: every structural
inconsistency raises a typed TriageError subclass, sizes are bounds-checked
before any slice, and hard limits cap resource use (16 MiB manifest, 65535
pool strings, 65535 elements).
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .core import PermissionSchema
from .errors import (
    CorruptEntryError,
    MalformedArchiveError,
    MalformedAxmlError,
    MissingManifestError,
    NotAxmlError,
    UnsupportedFeatureError,
)

# ZIP record signatures, little-endian on disk
_EOCD_SIG = 0x06054B50
_CENTRAL_SIG = 0x02014B50
_LOCAL_SIG = 0x04034B50

_METHOD_STORED = 0
_METHOD_DEFLATE = 8

_FLAG_ENCRYPTED = 0x0001
_FLAG_UTF8_NAME = 0x0800

MAX_MANIFEST_BYTES = 16 * 1024 * 1024
MAX_POOL_STRINGS = 65535
MAX_ELEMENTS = 65535


@dataclass(frozen=True)
class ZipEntry:
    """One central-directory entry, offsets resolved and validated."""

    name: str
    method: int
    crc32: int
    compressed_size: int
    uncompressed_size: int
    local_offset: int
    data_offset: int


def zip_list(data: bytes) -> list[ZipEntry]:
    """Parse the central directory; entries come back in directory order."""
    n = len(data)
    eocd_at = _find_eocd(data)
    (cd_count, cd_size, cd_offset) = _read_eocd(data, eocd_at)
    if cd_offset + cd_size > eocd_at:
        raise MalformedArchiveError("central directory overruns its own end record")

    entries = []
    pos = cd_offset
    for i in range(cd_count):
        if pos + 46 > cd_offset + cd_size:
            raise MalformedArchiveError("central directory truncated at entry %d" % i)
        (sig, _vmade, _vneed, flags, method, _mtime, _mdate, crc, csize, usize,
         name_len, extra_len, comment_len, disk_start, _iattr, _eattr,
         local_off) = struct.unpack_from("<IHHHHHHIIIHHHHHII", data, pos)
        if sig != _CENTRAL_SIG:
            raise MalformedArchiveError("bad central header signature at entry %d" % i)
        if disk_start != 0:
            raise UnsupportedFeatureError("entry %d starts on another disk" % i)
        end = pos + 46 + name_len + extra_len + comment_len
        if end > cd_offset + cd_size:
            raise MalformedArchiveError("entry %d fields overrun the directory" % i)
        name = _decode_name(data[pos + 46:pos + 46 + name_len], flags)
        data_off = _resolve_data_offset(data, local_off, i)
        if data_off + csize > n:
            raise MalformedArchiveError("entry %d data overruns the archive" % i)
        if method == _METHOD_STORED and csize != usize:
            raise MalformedArchiveError(
                "stored entry %d has compressed size %d != size %d" % (i, csize, usize))
        entries.append(ZipEntry(name, method, crc, csize, usize, local_off, data_off))
        pos = end
    if pos != cd_offset + cd_size:
        raise MalformedArchiveError("central directory size does not match its entries")
    return entries


def zip_extract(data: bytes, entry: ZipEntry) -> bytes:
    """Decompress and CRC-check one entry."""
    if entry.method not in (_METHOD_STORED, _METHOD_DEFLATE):
        raise UnsupportedFeatureError(
            "entry %r uses unsupported compression method %d" % (entry.name, entry.method))
    raw = data[entry.data_offset:entry.data_offset + entry.compressed_size]
    if len(raw) != entry.compressed_size:
        raise MalformedArchiveError("entry %r data lies outside the archive" % entry.name)
    if entry.method == _METHOD_STORED:
        out = raw
    else:
        try:
            decomp = zlib.decompressobj(-15)
            out = decomp.decompress(raw, entry.uncompressed_size + 1)
            out += decomp.flush()
        except zlib.error as exc:
            raise CorruptEntryError("entry %r fails to inflate: %s" % (entry.name, exc))
    if len(out) != entry.uncompressed_size:
        raise CorruptEntryError(
            "entry %r inflated to %d bytes, directory says %d"
            % (entry.name, len(out), entry.uncompressed_size))
    if zlib.crc32(out) & 0xFFFFFFFF != entry.crc32:
        raise CorruptEntryError("entry %r fails its CRC-32 check" % entry.name)
    return out


def _find_eocd(data: bytes) -> int:
    """Locate the end-of-central-directory record.

    Scans backwards through the trailing 64 KiB for the signature and takes
    the first candidate whose comment length reaches the end of the file
    exactly, which skips signatures embedded inside the comment itself.
    """
    n = len(data)
    if n < 22:
        raise MalformedArchiveError("too short to hold an end record")
    sig = struct.pack("<I", _EOCD_SIG)
    lo = max(0, n - 22 - 0xFFFF)
    # latest legal record start is n-22, so the 4-byte signature match
    # must be allowed to end at n-18
    pos = data.rfind(sig, lo, n - 18)
    while pos >= 0:
        comment_len = struct.unpack_from("<H", data, pos + 20)[0]
        if pos + 22 + comment_len == n:
            return pos
        pos = data.rfind(sig, lo, pos)
    raise MalformedArchiveError("no end-of-central-directory record")


def _read_eocd(data: bytes, pos: int) -> tuple[int, int, int]:
    (_sig, disk, cd_disk, n_disk, n_total, cd_size, cd_offset,
     _comment_len) = struct.unpack_from("<IHHHHIIH", data, pos)
    if disk != 0 or cd_disk != 0:
        raise UnsupportedFeatureError("multi-disk archives are not supported")
    if n_disk != n_total:
        raise MalformedArchiveError("entry counts disagree in the end record")
    if cd_offset + cd_size > pos:
        raise MalformedArchiveError("central directory does not fit before the end record")
    return n_total, cd_size, cd_offset


def _resolve_data_offset(data: bytes, local_off: int, index: int) -> int:
    if local_off + 30 > len(data):
        raise MalformedArchiveError("entry %d local header lies outside the archive" % index)
    sig, = struct.unpack_from("<I", data, local_off)
    if sig != _LOCAL_SIG:
        raise MalformedArchiveError("entry %d has no local header at its offset" % index)
    name_len, extra_len = struct.unpack_from("<HH", data, local_off + 26)
    return local_off + 30 + name_len + extra_len


def _decode_name(raw: bytes, flags: int) -> str:
    if flags & _FLAG_ENCRYPTED:
        raise UnsupportedFeatureError("encrypted entries are not supported")
    if flags & _FLAG_UTF8_NAME:
        return raw.decode("utf-8", errors="replace")
    return raw.decode("cp437")


# -- Android binary XML -----------------------------------------------------

_CHUNK_AXML_FILE = 0x0003
_CHUNK_STRING_POOL = 0x0001
_CHUNK_RESOURCE_MAP = 0x0180
_CHUNK_START_NAMESPACE = 0x0100
_CHUNK_END_NAMESPACE = 0x0101
_CHUNK_START_ELEMENT = 0x0102
_CHUNK_END_ELEMENT = 0x0103
_CHUNK_CDATA = 0x0104

_POOL_UTF8_FLAG = 1 << 8

_TYPE_REFERENCE = 0x01
_TYPE_STRING = 0x03
_TYPE_INT_DEC = 0x10
_TYPE_INT_HEX = 0x11
_TYPE_BOOLEAN = 0x12

_NO_VALUE = 0xFFFFFFFF


@dataclass(frozen=True)
class AxmlElement:
    name: str
    attributes: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class AxmlDocument:
    """Flattened element stream of a binary manifest, document order."""

    elements: tuple[AxmlElement, ...]


def axml_parse(blob: bytes) -> AxmlDocument:
    """Decode a binary AndroidManifest.xml blob."""
    if len(blob) > MAX_MANIFEST_BYTES:
        raise MalformedAxmlError("manifest exceeds the %d byte limit" % MAX_MANIFEST_BYTES)
    if len(blob) < 8:
        raise NotAxmlError("too short for a binary-XML header")
    ftype, fheader, fsize = struct.unpack_from("<HHI", blob, 0)
    if ftype != _CHUNK_AXML_FILE:
        raise NotAxmlError("wrong magic 0x%04x" % ftype)
    if fheader < 8 or fheader > len(blob) or fsize != len(blob):
        raise MalformedAxmlError("file chunk size %d does not match blob size %d"
                                 % (fsize, len(blob)))

    pool: list[str] | None = None
    elements: list[AxmlElement] = []
    depth = 0
    pos = fheader
    while pos < len(blob):
        if pos + 8 > len(blob):
            raise MalformedAxmlError("trailing bytes too short for a chunk header")
        ctype, cheader, csize = struct.unpack_from("<HHI", blob, pos)
        if csize < 8 or cheader < 8 or cheader > csize or pos + csize > len(blob):
            raise MalformedAxmlError("chunk 0x%04x at %d has inconsistent sizes" % (ctype, pos))
        if ctype == _CHUNK_STRING_POOL:
            if pool is not None:
                raise MalformedAxmlError("second string pool")
            pool = _parse_string_pool(blob, pos, cheader, csize)
        elif ctype == _CHUNK_START_ELEMENT:
            if pool is None:
                raise MalformedAxmlError("element before the string pool")
            if len(elements) >= MAX_ELEMENTS:
                raise MalformedAxmlError("more than %d elements" % MAX_ELEMENTS)
            elements.append(_parse_start_element(blob, pos, cheader, csize, pool))
            depth += 1
        elif ctype == _CHUNK_END_ELEMENT:
            depth -= 1
            if depth < 0:
                raise MalformedAxmlError("end element without a matching start")
        elif ctype in (_CHUNK_RESOURCE_MAP, _CHUNK_START_NAMESPACE,
                       _CHUNK_END_NAMESPACE, _CHUNK_CDATA):
            pass
        # unknown chunk types are skipped by size, like the platform does
        pos += csize
    if depth != 0:
        raise MalformedAxmlError("%d elements left open" % depth)
    return AxmlDocument(tuple(elements))


def _parse_string_pool(blob: bytes, pos: int, header: int, size: int) -> list[str]:
    if header < 28:
        raise MalformedAxmlError("string pool header too short")
    count, style_count, flags, strings_start, styles_start = struct.unpack_from(
        "<IIIII", blob, pos + 8)
    if count > MAX_POOL_STRINGS:
        raise MalformedAxmlError("string pool holds %d strings, limit is %d"
                                 % (count, MAX_POOL_STRINGS))
    offsets_at = pos + header
    if offsets_at + 4 * (count + style_count) > pos + size:
        raise MalformedAxmlError("string pool offset table overruns the chunk")
    if strings_start > size:
        raise MalformedAxmlError("string data starts outside the pool")
    data_end = pos + size
    if style_count > 0 and 0 < styles_start <= size:
        data_end = pos + styles_start
    utf8 = bool(flags & _POOL_UTF8_FLAG)

    strings = []
    for i in range(count):
        rel, = struct.unpack_from("<I", blob, offsets_at + 4 * i)
        at = pos + strings_start + rel
        if at < pos + strings_start or at >= data_end:
            raise MalformedAxmlError("string %d offset lies outside the pool" % i)
        strings.append(_decode_pool_string(blob, at, data_end, utf8, i))
    return strings


def _decode_pool_string(blob: bytes, at: int, end: int, utf8: bool, index: int) -> str:
    if utf8:
        _, at = _read_utf8_len(blob, at, end, index)   # decoded-length field, unused
        nbytes, at = _read_utf8_len(blob, at, end, index)
        if at + nbytes >= end:
            raise MalformedAxmlError("string %d data overruns the pool" % index)
        try:
            return blob[at:at + nbytes].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedAxmlError("string %d is not valid UTF-8: %s" % (index, exc))
    if at + 2 > end:
        raise MalformedAxmlError("string %d length field overruns the pool" % index)
    n, = struct.unpack_from("<H", blob, at)
    at += 2
    if n & 0x8000:
        if at + 2 > end:
            raise MalformedAxmlError("string %d extended length overruns the pool" % index)
        lo, = struct.unpack_from("<H", blob, at)
        n = ((n & 0x7FFF) << 16) | lo
        at += 2
    if at + 2 * n + 2 > end:
        raise MalformedAxmlError("string %d data overruns the pool" % index)
    if blob[at + 2 * n:at + 2 * n + 2] != b"\x00\x00":
        raise MalformedAxmlError("string %d is not null-terminated" % index)
    try:
        return blob[at:at + 2 * n].decode("utf-16-le")
    except UnicodeDecodeError as exc:
        raise MalformedAxmlError("string %d is not valid UTF-16: %s" % (index, exc))


def _read_utf8_len(blob: bytes, at: int, end: int, index: int) -> tuple[int, int]:
    if at >= end:
        raise MalformedAxmlError("string %d length field overruns the pool" % index)
    n = blob[at]
    at += 1
    if n & 0x80:
        if at >= end:
            raise MalformedAxmlError("string %d extended length overruns the pool" % index)
        n = ((n & 0x7F) << 8) | blob[at]
        at += 1
    return n, at


def _pool_string(pool: list[str], index: int, what: str) -> str:
    if index >= len(pool):
        raise MalformedAxmlError("%s references string %d of a %d-string pool"
                                 % (what, index, len(pool)))
    return pool[index]


def _parse_start_element(blob: bytes, pos: int, header: int, size: int,
                         pool: list[str]) -> AxmlElement:
    # chunk header (8) + line number (4) + comment (4), then the element body
    if header < 16 or size < header + 20:
        raise MalformedAxmlError("start element chunk too short")
    body = pos + header
    (_ns, name_idx, attr_start, attr_size, attr_count,
     _id_idx, _class_idx, _style_idx) = struct.unpack_from("<IIHHHHHH", blob, body)
    name = _pool_string(pool, name_idx, "element name")
    if attr_size < 20:
        raise MalformedAxmlError("attribute record size %d too small" % attr_size)
    attrs_at = body + attr_start
    if attrs_at + attr_count * attr_size > pos + size:
        raise MalformedAxmlError("attributes of <%s> overrun the chunk" % name)
    attrs = []
    for k in range(attr_count):
        at = attrs_at + k * attr_size
        _ans, aname_idx, raw_idx, _sz, _res0, dtype, data = struct.unpack_from(
            "<IIIHBBI", blob, at)
        aname = _pool_string(pool, aname_idx, "attribute name")
        attrs.append((aname, _attr_value(pool, raw_idx, dtype, data)))
    return AxmlElement(name, tuple(attrs))


def _attr_value(pool: list[str], raw_idx: int, dtype: int, data: int) -> str:
    if raw_idx != _NO_VALUE:
        return _pool_string(pool, raw_idx, "attribute value")
    if dtype == _TYPE_STRING:
        return _pool_string(pool, data, "attribute value")
    if dtype == _TYPE_BOOLEAN:
        return "true" if data else "false"
    if dtype == _TYPE_INT_DEC:
        if data & 0x80000000:
            data -= 1 << 32
        return str(data)
    if dtype == _TYPE_INT_HEX:
        return "0x%x" % data
    if dtype == _TYPE_REFERENCE:
        return "@0x%08x" % data
    return "<0x%02x:0x%08x>" % (dtype, data)


# -- permission extraction --------------------------------------------------

_PERMISSION_ELEMENTS = ("uses-permission", "uses-permission-sdk-23")


def extract_permissions(apk_bytes: bytes) -> set[str]:
    """Permissions requested by an APK's manifest.

    Returns the android:name values of every uses-permission and
    uses-permission-sdk-23 element. Raises MissingManifestError when the
    archive has no AndroidManifest.xml entry, and the parser errors above for
    anything structurally wrong on the way there.
    """
    entries = zip_list(apk_bytes)
    manifest = None
    for entry in entries:
        if entry.name == "AndroidManifest.xml":
            manifest = entry
            break
    if manifest is None:
        raise MissingManifestError("archive has no AndroidManifest.xml")
    if manifest.uncompressed_size > MAX_MANIFEST_BYTES:
        raise MalformedAxmlError("manifest exceeds the %d byte limit" % MAX_MANIFEST_BYTES)
    doc = axml_parse(zip_extract(apk_bytes, manifest))
    perms = set()
    for element in doc.elements:
        if element.name in _PERMISSION_ELEMENTS:
            for aname, avalue in element.attributes:
                if aname == "name":
                    perms.add(avalue)
    return perms


def vectorize(perms: set[str], schema: PermissionSchema) -> tuple[np.ndarray, tuple[str, ...]]:
    """Binary feature vector over the schema, plus the unknown names.

    Permissions absent from the schema are never an error; they come back as
    the second element (sorted) so callers can report them.
    """
    bits = np.zeros(len(schema), dtype=np.uint8)
    known = set(schema.names)
    for i, name in enumerate(schema.names):
        if name in perms:
            bits[i] = 1
    unknown = tuple(sorted(set(perms) - known))
    bits.flags.writeable = False
    return bits, unknown
