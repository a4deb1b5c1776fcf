// wsner/cli.hpp
//
// Copyright 2026  The wsner authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABILITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef WSNER_CLI_HPP_
#define WSNER_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace wsner {

// Entry point behind main(). Subcommands: stats, split, filter, weak-label,
// corrupt, gensynth, train, evaluate, iaa, experiment. Returns the process
// exit code: 0 success, 1 validation/runtime failure (one-line diagnostic on
// err), 2 usage errors (usage text on err).
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace wsner

#endif  // WSNER_CLI_HPP_
