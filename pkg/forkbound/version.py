# -*- coding: utf-8 -*-

# Copyright 2026 The forkbound authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

__version__ = VERSION = "VERSION{0.4.0}VERSION"[8:-8]
__build__ = BUILD = "BUILD{2026-10-18}BUILD"[6:-6]

VERSION_STR = """forkbound %s (Build %s)
Statistical delay bounds for fork-join, split-merge, (k,l), thinned and
multi-stage queueing systems, with a max-plus trajectory simulator.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0""" % (
    VERSION,
    BUILD,
)
