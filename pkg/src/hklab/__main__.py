import sys

from hklab.cli import main

sys.exit(main())
