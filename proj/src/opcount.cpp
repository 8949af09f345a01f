#include "dlfusion/opcount.hpp"

#include <initializer_list>

#include "dlfusion/error.hpp"

namespace dlfusion {

namespace {

std::uint64_t checked_product(std::initializer_list<std::int64_t> factors) {
  std::uint64_t acc = 1;
  for (auto f : factors) {
    if (f < 0) throw DomainError("negative dimension in op count");
    if (__builtin_mul_overflow(acc, static_cast<std::uint64_t>(f), &acc)) {
      throw OverflowError("op count exceeds 2^64 - 1");
    }
  }
  return acc;
}

std::uint64_t checked_sum(std::initializer_list<std::uint64_t> terms) {
  std::uint64_t acc = 0;
  for (auto t : terms) {
    if (__builtin_add_overflow(acc, t, &acc)) throw OverflowError("byte count exceeds 2^64 - 1");
  }
  return acc;
}

}  // namespace

OpCount conv_ops(const ConvParams& p) {
  return {checked_product({2, p.h_out, p.w_out, p.k_h, p.k_w, p.c_in, p.c_out})};
}

OpCount fc_ops(const FcParams& p) { return {checked_product({2, p.m, p.k, p.n})}; }

OpCount layer_ops(const Layer& l) {
  if (l.conv) return conv_ops(*l.conv);
  if (l.fc) return fc_ops(*l.fc);
  return {};
}

std::uint64_t ops_per_output_pixel(const Layer& l) {
  if (l.conv) return checked_product({2, l.conv->k_h, l.conv->k_w, l.conv->c_in, l.conv->c_out});
  if (l.fc) return checked_product({2, l.fc->k});
  return 0;
}

std::uint64_t input_bytes(const Layer& l, std::int64_t bpe) {
  if (l.conv) return checked_product({l.conv->c_in, l.conv->h_in(), l.conv->w_in(), bpe});
  if (l.fc) return checked_product({l.fc->m, l.fc->k, bpe});
  return 0;
}

std::uint64_t output_bytes(const Layer& l, std::int64_t bpe) {
  if (l.conv) return checked_product({l.conv->c_out, l.conv->h_out, l.conv->w_out, bpe});
  if (l.fc) return checked_product({l.fc->m, l.fc->n, bpe});
  return 0;
}

std::uint64_t weight_bytes(const Layer& l, std::int64_t bpe) {
  if (l.conv) return checked_product({l.conv->c_in, l.conv->c_out, l.conv->k_h, l.conv->k_w, bpe});
  if (l.fc) return checked_product({l.fc->k, l.fc->n, bpe});
  return 0;
}

std::uint64_t tensor_bytes(const Layer& l, std::int64_t bpe) {
  if (bpe < 1) throw DomainError("bytes_per_element must be ≥ 1");
  return checked_sum({input_bytes(l, bpe), output_bytes(l, bpe), weight_bytes(l, bpe)});
}

Intensity intensity(const Layer& l, std::int64_t bpe) {
  if (!l.is_compute()) {
    throw NotComputeLayerError("layer " + std::to_string(l.id) + " (" +
                               std::string(to_string(l.kind)) + ") has no operation intensity");
  }
  return {static_cast<double>(layer_ops(l).ops) / static_cast<double>(tensor_bytes(l, bpe))};
}

SpaceSize search_space(int n) {
  if (n < 2) throw DomainError("search space is defined for n ≥ 2 layers");
  SpaceSize total = 0;
  SpaceSize falling = 1;   // prod_{x=1}^{i} (n - x)
  SpaceSize factorial = 1; // i!
  SpaceSize power = 32;    // 32^{i+1}, advanced at the top of the loop
  for (int i = 1; i <= n - 1; ++i) {
    falling *= (n - i);
    factorial *= i;
    power *= 32;
    total += power * (falling / factorial);
  }
  return total;
}

SpaceSize search_space_closed_form(int n) {
  if (n < 2) throw DomainError("search space is defined for n ≥ 2 layers");
  SpaceSize p = boost::multiprecision::pow(SpaceSize(33), static_cast<unsigned>(n - 1));
  return 32 * (p - 1);
}

std::string scientific(const SpaceSize& value, int digits) {
  if (digits < 1) throw DomainError("scientific rendering needs at least one digit");
  if (value < 0) return "-" + scientific(-value, digits);
  std::string s = value.str();
  int exponent = static_cast<int>(s.size()) - 1;
  if (static_cast<int>(s.size()) > digits) {
    // Round half up on the first dropped digit.
    std::string head = s.substr(0, static_cast<std::size_t>(digits));
    bool round_up = s[static_cast<std::size_t>(digits)] >= '5';
    if (round_up) {
      int i = digits - 1;
      while (i >= 0 && head[static_cast<std::size_t>(i)] == '9') {
        head[static_cast<std::size_t>(i)] = '0';
        --i;
      }
      if (i < 0) {
        head.insert(head.begin(), '1');
        head.pop_back();
        ++exponent;
      } else {
        ++head[static_cast<std::size_t>(i)];
      }
    }
    s = head;
  } else {
    s.append(static_cast<std::size_t>(digits) - s.size(), '0');
  }
  std::string mantissa = s.substr(0, 1);
  if (digits > 1) mantissa += "." + s.substr(1);
  return mantissa + "e" + std::to_string(exponent);
}

}  // namespace dlfusion
