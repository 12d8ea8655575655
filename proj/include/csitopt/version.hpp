// SPDX-License-Identifier: Apache-2.0
//
// csitopt - training and feedback budgeting for the multiuser MIMO downlink
// Copyright (C) 2026 The csitopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CSITOPT_VERSION_HPP
#define CSITOPT_VERSION_HPP

// Build systems pass -DCSITOPT_VERSION="<git describe>"; plain includes get the release number.
#ifndef CSITOPT_VERSION
#define CSITOPT_VERSION "0.1.0"
#endif

namespace csitopt
{
inline constexpr const char* version_string = CSITOPT_VERSION;
}

#endif
