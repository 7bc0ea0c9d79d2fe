/*
 * Copyright 2026 The coremil Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef COREMIL_ERRORS_H_
#define COREMIL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace coremil {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Image and mask (or heatmap and positions) disagree on geometry.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// A core produced no qualifying ROI and cannot be classified.
class EmptyBagError : public Error {
 public:
  using Error::Error;
};

// A ranking metric was requested on a label set with a single class.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// On-disk artifact is malformed or has an unsupported format version.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Checkpoint was produced under a different configuration.
class ConfigMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace coremil

#endif  // COREMIL_ERRORS_H_
