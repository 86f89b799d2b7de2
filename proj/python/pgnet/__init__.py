from pgnet._pgnet import *  # noqa: F401,F403
