// SPDX-License-Identifier: Apache-2.0
//
// radfuse - multi-radar respiratory sensing and signal fusion
// Copyright (C) 2026 The radfuse authors
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

#pragma once

#include "radfuse/dsp.hpp"
#include "radfuse/eig.hpp"
#include "radfuse/error.hpp"
#include "radfuse/experiment.hpp"
#include "radfuse/fft.hpp"
#include "radfuse/fusion.hpp"
#include "radfuse/io.hpp"
#include "radfuse/radar.hpp"
#include "radfuse/series.hpp"
#include "radfuse/simulator.hpp"
#include "radfuse/vitals.hpp"
#include "radfuse/vmd.hpp"
