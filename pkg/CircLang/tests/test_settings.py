import os
import unittest
from unittest import mock

from CircLang import settings


class ResolveSeedTest(unittest.TestCase):

    def test_flag_wins(self):
        with mock.patch.dict(os.environ, {settings.SEED_ENV_VAR: "11"}):
            self.assertEqual(settings.resolve_seed(5), 5)

    def test_environment_variable(self):
        with mock.patch.dict(os.environ, {settings.SEED_ENV_VAR: "11"}):
            self.assertEqual(settings.resolve_seed(None), 11)

    def test_default(self):
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(settings.resolve_seed(), settings.DEFAULT_SEED)
        with mock.patch.dict(os.environ, {settings.SEED_ENV_VAR: "  "}):
            self.assertEqual(settings.resolve_seed(), settings.DEFAULT_SEED)

    def test_invalid_values(self):
        with mock.patch.dict(os.environ, {settings.SEED_ENV_VAR: "seven"}):
            with self.assertRaises(ValueError):
                settings.resolve_seed()
        with self.assertRaises(ValueError):
            settings.resolve_seed(-1)
        with self.assertRaises(ValueError):
            settings.resolve_seed(2 ** 64)
        self.assertEqual(settings.resolve_seed(2 ** 64 - 1), 2 ** 64 - 1)


if __name__ == '__main__':
    unittest.main()
