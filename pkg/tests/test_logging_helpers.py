import logging
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from nlslab.logging_helpers import configure_root_logger, get_logger


class TestLogging:
    def test_module_loggers_share_the_prefix(self):
        assert get_logger("modulation").name == "NLSLAB.modulation"

    def test_reconfiguring_does_not_stack_handlers(self, tmp_path):
        logfile = tmp_path / "run.log"
        configure_root_logger(str(logfile))
        logger = configure_root_logger(str(logfile), "warning")
        active = [h for h in logger.handlers if not isinstance(h, logging.NullHandler)]
        assert len(active) == 2
        assert logger.level == logging.WARNING

    def test_file_receives_records(self, tmp_path):
        logfile = tmp_path / "run.log"
        configure_root_logger(str(logfile), "INFO")
        get_logger("cli").info("Running simulate")
        for handler in logging.getLogger("NLSLAB").handlers:
            handler.flush()
        assert "NLSLAB.cli" in logfile.read_text()
        assert "Running simulate" in logfile.read_text()
