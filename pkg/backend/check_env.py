#!/usr/bin/env python3
"""
Quick script to check the environment and configuration
"""
import importlib
import os

from dotenv import load_dotenv

load_dotenv()

print("=" * 50)
print("Environment Check")
print("=" * 50)

# Check required packages
for package in ("numpy", "pydantic", "tqdm", "dotenv"):
    try:
        module = importlib.import_module(package)
        print(f"✓ {package}: {getattr(module, '__version__', 'installed')}")
    except ImportError:
        print(f"✗ {package}: NOT INSTALLED")
        print("  Run: pip install -r requirements.txt")

for package in ("pytest", "hypothesis"):
    try:
        module = importlib.import_module(package)
        print(f"✓ {package}: {getattr(module, '__version__', 'installed')}")
    except ImportError:
        print(f"⚠ {package}: not installed (only needed for the test suite)")

print()

# Check output directory
output_dir = os.getenv("OUTPUT_DIR", "outputs")
if os.path.isdir(output_dir):
    writable = os.access(output_dir, os.W_OK)
    print(f"{'✓' if writable else '✗'} OUTPUT_DIR: {output_dir} ({'writable' if writable else 'NOT WRITABLE'})")
else:
    print(f"⚠ OUTPUT_DIR: {output_dir} (will be created on first run)")

log_level = os.getenv("LOG_LEVEL", "INFO").upper()
if log_level in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
    print(f"✓ LOG_LEVEL: {log_level}")
else:
    print(f"✗ LOG_LEVEL: {log_level} is not a logging level")

print()

# Check numeric settings
try:
    from config import Config

    print("Spectral Configuration:")
    print(f"  SPECTRAL_SAMPLES: {Config.SPECTRAL_SAMPLES}")
    print(f"  RESOLVING_TOLERANCE: {Config.RESOLVING_TOLERANCE}")
    print(f"  OVERDISSIPATION_FACTOR: {Config.OVERDISSIPATION_FACTOR}")
    print(f"  THRESHOLD_SLACK: {Config.THRESHOLD_SLACK}")

    print()
    print("Solver Configuration:")
    print(f"  CFL: {Config.CFL}")
    print(f"  MAX_STEPS: {Config.MAX_STEPS}")
    print(f"  GAMMA: {Config.GAMMA}")
    print(f"  PRANDTL: {Config.PRANDTL}")
    print(f"  FILTER_STRENGTH: {Config.FILTER_STRENGTH}")

    if Config.SPECTRAL_SAMPLES < 16:
        print("✗ SPECTRAL_SAMPLES must be at least 16")
    if not 0 < Config.FILTER_STRENGTH <= 1:
        print("✗ FILTER_STRENGTH must lie in (0, 1]")
except ValueError as e:
    print(f"✗ Configuration could not be parsed: {e}")

print("=" * 50)
