import sys

from kgp.serve.cli import main

sys.exit(main())
