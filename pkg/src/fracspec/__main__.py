from __future__ import annotations

import sys

from fracspec.cli import main

sys.exit(main())
