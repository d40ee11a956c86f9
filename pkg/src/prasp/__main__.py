from prasp.cli import main
import sys

sys.exit(main())
