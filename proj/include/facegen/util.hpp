#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace facegen {

std::string base64_encode(const uint8_t* data, size_t len);
std::vector<uint8_t> base64_decode(const std::string& text);

// SHA-256 of a byte buffer, lowercase hex.
std::string sha256_hex(const uint8_t* data, size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::string& path);

uint32_t crc32_bytes(const uint8_t* data, size_t len);
uint32_t crc32_update(uint32_t crc, const uint8_t* data, size_t len);

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const uint8_t* data, size_t len);
std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);

// Write to <path>.tmp then rename, so readers never observe a partial file.
void write_file_atomic(const std::string& path, const uint8_t* data, size_t len);

// Number of workers: min(FACEGEN_THREADS, hardware_concurrency), at least 1.
int worker_count();

// Runs fn(i) for i in [0, n). Each index writes only its own outputs, so the
// result is identical for any worker count.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

std::string hex_u32(uint32_t v);

} // namespace facegen
