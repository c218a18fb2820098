"""
On-disk formats: PFM float maps, PPM images, bundle directories and PLY export
"""
from .pfm import read_pfm, write_pfm
from .ppm import encode_8bit, read_ppm, write_ppm
from .manifest import (
    BUNDLE_FILES,
    META_FILE,
    Bundle,
    BundleManifest,
    read_bundle,
    read_json,
    write_bundle,
    write_json,
    write_ply,
)

__all__ = [
    'BUNDLE_FILES',
    'META_FILE',
    'Bundle',
    'BundleManifest',
    'encode_8bit',
    'read_bundle',
    'read_json',
    'read_pfm',
    'read_ppm',
    'write_bundle',
    'write_json',
    'write_pfm',
    'write_ply',
    'write_ppm',
]
