#include "hydrofuse/errors.hpp"

namespace hydrofuse {

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e)) return 3;
    return 4;
}

}  // namespace hydrofuse
