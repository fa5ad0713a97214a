// Copyright 2026 The duorec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

namespace duorec {

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitConfigError = 2,
  kExitDataError = 3,
  kExitDivergence = 4,
  kExitGradCheckFailure = 5,
};

// Entry point shared by the binary and the tests; argv[0] is the program name.
int run_cli(int argc, const char* const* argv);

}  // namespace duorec
