#ifndef GPS_DATASETS_HPP
#define GPS_DATASETS_HPP

#include <vector>

namespace gps {

/// Strengths of 63 glass fibres of length 1.5 cm (National Physical
/// Laboratory, England); the worked example dataset.
const std::vector<double>& glass_fibre_strengths();

}  // namespace gps

#endif
