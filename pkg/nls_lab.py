import sys

from dotenv import load_dotenv

# NLSLAB_* variables are read when nlslab.config is imported
load_dotenv()

from nlslab.cli_io import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())
