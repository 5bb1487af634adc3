"""
Allow the package to be run as a module: python -m bridgeflow
"""

from .main import main

if __name__ == "__main__":
    main()
