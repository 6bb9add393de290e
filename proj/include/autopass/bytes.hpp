#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace autopass {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Overwrites memory in a way the optimizer may not elide.
void secure_wipe(void* data, std::size_t size) noexcept;

/// Owning byte buffer that is wiped on destruction and on reassignment.
class SecureBytes {
public:
    SecureBytes() = default;
    explicit SecureBytes(std::size_t size) : data_(size) {}
    explicit SecureBytes(ByteView bytes) : data_(bytes.begin(), bytes.end()) {}
    SecureBytes(const SecureBytes& other) : data_(other.data_) {}
    SecureBytes(SecureBytes&& other) noexcept : data_(std::move(other.data_)) {}
    SecureBytes& operator=(const SecureBytes& other);
    SecureBytes& operator=(SecureBytes&& other) noexcept;
    ~SecureBytes() { clear(); }

    void clear() noexcept;
    void append(ByteView bytes) { data_.insert(data_.end(), bytes.begin(), bytes.end()); }

    std::uint8_t* data() noexcept { return data_.data(); }
    const std::uint8_t* data() const noexcept { return data_.data(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    ByteView view() const noexcept { return {data_.data(), data_.size()}; }
    std::span<std::uint8_t> span() noexcept { return {data_.data(), data_.size()}; }

private:
    std::vector<std::uint8_t> data_;
};

/// Fixed 32-byte value distinguished by a tag type.
template <class Tag>
struct Bytes32 {
    std::array<std::uint8_t, 32> bytes{};

    ByteView view() const noexcept { return {bytes.data(), bytes.size()}; }
    friend bool operator==(const Bytes32&, const Bytes32&) = default;
};

inline ByteView as_bytes(std::string_view s) noexcept {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);

std::string base64_encode(ByteView bytes);
/// Throws Error(VaultFormat) on malformed input.
Bytes base64_decode(std::string_view text);

void append_u32_be(Bytes& out, std::uint32_t value);
void append_u64_be(Bytes& out, std::uint64_t value);

}  // namespace autopass
