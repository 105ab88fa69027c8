# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
__version__ = "v0.1.0"
