"""Allow running reasonforge as a module: python -m reasonforge"""

from .cli import main

if __name__ == "__main__":
    main()
