#ifndef POSTCAP_VERSION_HPP
#define POSTCAP_VERSION_HPP

namespace postcap {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace postcap

#endif  // POSTCAP_VERSION_HPP
