"""
detectbench: desk-scale simulator and fault-injection harness for hardware error-detection schemes.
"""

__version__ = "0.1.0"
