#!/usr/bin/env python
"""
Standalone worker runner for the bench queue
Run this script to start a worker; pass --burst to exit once the queue is empty
"""

import os
import sys
import django

# Setup Django
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
django.setup()

# Import and run worker
from ivsolve.worker import run_worker

if __name__ == '__main__':
    try:
        run_worker(burst='--burst' in sys.argv[1:])
    except KeyboardInterrupt:
        print("\n✓ Worker stopped")
        sys.exit(0)
    except Exception as e:
        print(f"\n✗ Worker error: {e}")
        sys.exit(1)
