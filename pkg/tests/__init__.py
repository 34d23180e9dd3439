"""
Tests package for sobolevlab
"""
