"""
lumedepth: depth and albedo recovery from a single image lit by a
camera-mounted spotlight
"""
