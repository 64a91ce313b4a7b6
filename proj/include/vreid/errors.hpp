/*
 * Copyright 2026 the vreid authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace vreid {

/// Base class for all vreid errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file: bad magic, unparsable metadata, unknown enum value.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input whose pieces disagree: header/payload count
/// mismatch, duplicate ids, out-of-range indices.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Dimension or matrix-shape mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter value (k too large, lambda out of range, ...).
class ParamError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or unusable input data: zero-norm row, empty set, empty
/// tracklet, missing ground truth, bad batch composition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A gallery frame is not covered by the tracklet index.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Synthetic scenario could not be realized (infeasible constraints).
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace vreid
