#ifndef W2P_ERROR_HPP
#define W2P_ERROR_HPP

#include <stdexcept>
#include <string>

namespace w2p {

// Bad input: malformed descriptors, inadmissible indices, violated preconditions.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A numerical check (tolerance, convergence, integrality) failed.
struct ToleranceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

}  // namespace w2p

#endif
