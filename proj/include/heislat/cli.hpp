// Copyright 2026 The heislat Authors
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

// Command-line front end. Subcommands: count, avg-count, bound, rank-check,
// energy, error-term, sweep, fit.
//
// Exit codes: 0 success, 1 internal error, 2 bad flags or invalid parameters.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace heislat::cli {

inline constexpr const char* kResultHeader =
    "experiment_id,n,alpha,C_alpha,c,Q,delta,mode,centers_used,raw_count,normalized,bound_rhs,ratio,stderr,seed,"
    "wall_ms";
inline constexpr const char* kEnergyHeader = "experiment_id,n,q,tau,t,method,samples,value,stderr,seed,wall_ms";
inline constexpr const char* kErrorTermHeader = "experiment_id,n,alpha,C_alpha,Q,lattice_count,volume,error,wall_ms";

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace heislat::cli
