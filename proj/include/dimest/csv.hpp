#pragma once

#include "dimest/types.hpp"

#include <string>

namespace dimest {

// Plain numeric CSV, header "x0,x1,...". Values are written with enough
// digits to round-trip doubles exactly.
void save_csv(const std::string& path, const Matrix& X);
Matrix load_csv(const std::string& path);

} // namespace dimest
