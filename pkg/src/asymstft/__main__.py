import sys

from asymstft.cli import main

sys.exit(main())
