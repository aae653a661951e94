from .runtests import buildTestSuite
