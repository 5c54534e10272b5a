import sys

from fracback.cli import main

sys.exit(main())
