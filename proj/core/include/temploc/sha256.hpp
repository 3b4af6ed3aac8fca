#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace temploc {

// Incremental SHA-256 (OpenSSL EVP underneath). Used for cache keys,
// template provenance digests and replay fixtures.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(const void* data, std::size_t len);
    Sha256& update(std::string_view s) { return update(s.data(), s.size()); }
    Sha256& update(const std::vector<unsigned char>& v) { return update(v.data(), v.size()); }
    // Little-endian fixed-width integer, for unambiguous field framing.
    Sha256& update_u64(std::uint64_t v);

    std::string hex_digest();

private:
    void* ctx_;
};

std::string sha256_hex(std::string_view data);
std::string sha256_hex(const std::vector<unsigned char>& data);

}  // namespace temploc
