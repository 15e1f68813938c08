#include "cbm/errors.hpp"

namespace cbm::detail {

void fail_validation(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

void fail_numerical(const std::string& where, const std::string& what) {
    throw NumericalError(where + ": " + what);
}

}  // namespace cbm::detail
