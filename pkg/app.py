# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import sys

from core.cli.commands import main


if __name__ == "__main__":
    sys.exit(main())
