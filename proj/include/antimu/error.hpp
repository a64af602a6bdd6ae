#pragma once

#include <stdexcept>
#include <string>

namespace antimu {

// Base of every error raised by the library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define ANTIMU_DEFINE_ERROR(name)          \
  struct name : error {                    \
    using error::error;                    \
  }

ANTIMU_DEFINE_ERROR(coordinate_error);
ANTIMU_DEFINE_ERROR(config_error);
ANTIMU_DEFINE_ERROR(encoding_error);
ANTIMU_DEFINE_ERROR(decoding_error);
ANTIMU_DEFINE_ERROR(affinity_error);
ANTIMU_DEFINE_ERROR(rank_error);
ANTIMU_DEFINE_ERROR(input_error);
ANTIMU_DEFINE_ERROR(objective_error);
ANTIMU_DEFINE_ERROR(shape_error);
ANTIMU_DEFINE_ERROR(state_error);
ANTIMU_DEFINE_ERROR(format_error);
ANTIMU_DEFINE_ERROR(render_error);
ANTIMU_DEFINE_ERROR(generation_error);

#undef ANTIMU_DEFINE_ERROR

}  // namespace antimu
