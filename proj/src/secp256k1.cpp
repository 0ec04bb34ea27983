#include "sealbid/secp256k1.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>
#include <sodium.h>

#include <cstring>
#include <memory>

namespace sealbid::secp256k1 {

namespace {

struct BnDeleter {
  void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
struct CtxDeleter {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct PointDeleter {
  void operator()(EC_POINT* p) const { EC_POINT_clear_free(p); }
};

using Bn = std::unique_ptr<BIGNUM, BnDeleter>;
using Ctx = std::unique_ptr<BN_CTX, CtxDeleter>;
using Point = std::unique_ptr<EC_POINT, PointDeleter>;

Bn new_bn() {
  Bn b(BN_new());
  if (!b) throw std::bad_alloc();
  return b;
}

Bn bn_from(const std::uint8_t* data, std::size_t len) {
  Bn b(BN_bin2bn(data, static_cast<int>(len), nullptr));
  if (!b) throw std::bad_alloc();
  return b;
}

Bn bn_from(const Hash32& h) { return bn_from(h.data(), h.size()); }

Hash32 to_word(const BIGNUM* b) {
  Hash32 out{};
  BN_bn2binpad(b, out.data(), static_cast<int>(out.size()));
  return out;
}

struct Curve {
  EC_GROUP* group = nullptr;
  BIGNUM* order = nullptr;
  BIGNUM* half_order = nullptr;
  BIGNUM* prime = nullptr;

  Curve() {
    group = EC_GROUP_new_by_curve_name(NID_secp256k1);
    order = BN_new();
    half_order = BN_new();
    prime = BN_new();
    Ctx ctx(BN_CTX_new());
    EC_GROUP_get_order(group, order, ctx.get());
    BN_rshift1(half_order, order);
    EC_GROUP_get_curve(group, prime, nullptr, nullptr, ctx.get());
  }
  ~Curve() {
    BN_free(prime);
    BN_free(half_order);
    BN_free(order);
    EC_GROUP_free(group);
  }
  Curve(const Curve&) = delete;
  Curve& operator=(const Curve&) = delete;
};

const Curve& curve() {
  static const Curve instance;
  return instance;
}

Point new_point() {
  Point p(EC_POINT_new(curve().group));
  if (!p) throw std::bad_alloc();
  return p;
}

PublicKey encode_point(const EC_POINT* p, BN_CTX* ctx) {
  std::uint8_t buf[65];
  if (EC_POINT_point2oct(curve().group, p, POINT_CONVERSION_UNCOMPRESSED, buf, sizeof buf, ctx) != 65) {
    throw KeyError("cannot encode point");
  }
  PublicKey out;
  std::memcpy(out.xy.data(), buf + 1, 64);
  return out;
}

Point decode_point(const PublicKey& key, BN_CTX* ctx) {
  std::uint8_t buf[65];
  buf[0] = 0x04;
  std::memcpy(buf + 1, key.xy.data(), 64);
  Point p = new_point();
  if (EC_POINT_oct2point(curve().group, p.get(), buf, sizeof buf, ctx) != 1) return nullptr;
  return p;
}

bool in_scalar_range(const BIGNUM* v) { return !BN_is_zero(v) && BN_cmp(v, curve().order) < 0; }

class Rfc6979 {
 public:
  Rfc6979(const Hash32& secret, const Hash32& digest) {
    const Curve& c = curve();
    Ctx ctx(BN_CTX_new());
    Bn h = bn_from(digest);
    BN_nnmod(h.get(), h.get(), c.order, ctx.get());
    Hash32 h1 = to_word(h.get());

    v_.fill(0x01);
    k_.fill(0x00);
    reseed(0x00, secret, h1);
    reseed(0x01, secret, h1);
  }

  Hash32 next() {
    if (!first_) {
      hmac_k({v_.data(), v_.size()}, 0x00, true);
      v_ = hmac(v_);
    }
    first_ = false;
    v_ = hmac(v_);
    return v_;
  }

 private:
  Hash32 hmac(const Hash32& msg) const {
    Hash32 out;
    crypto_auth_hmacsha256_state st;
    crypto_auth_hmacsha256_init(&st, k_.data(), k_.size());
    crypto_auth_hmacsha256_update(&st, msg.data(), msg.size());
    crypto_auth_hmacsha256_final(&st, out.data());
    return out;
  }

  void hmac_k(ByteView v, std::uint8_t tag, bool tag_only, const Hash32* x = nullptr, const Hash32* h1 = nullptr) {
    Hash32 out;
    crypto_auth_hmacsha256_state st;
    crypto_auth_hmacsha256_init(&st, k_.data(), k_.size());
    crypto_auth_hmacsha256_update(&st, v.data(), v.size());
    crypto_auth_hmacsha256_update(&st, &tag, 1);
    if (!tag_only) {
      crypto_auth_hmacsha256_update(&st, x->data(), x->size());
      crypto_auth_hmacsha256_update(&st, h1->data(), h1->size());
    }
    crypto_auth_hmacsha256_final(&st, out.data());
    k_ = out;
  }

  void reseed(std::uint8_t tag, const Hash32& x, const Hash32& h1) {
    hmac_k({v_.data(), v_.size()}, tag, false, &x, &h1);
    v_ = hmac(v_);
  }

  Hash32 v_{};
  Hash32 k_{};
  bool first_ = true;
};

}  // namespace

bool is_valid_secret(const Hash32& secret) {
  Bn d = bn_from(secret);
  return in_scalar_range(d.get());
}

PublicKey derive_public_key(const Hash32& secret) {
  Bn d = bn_from(secret);
  if (!in_scalar_range(d.get())) throw KeyError("secret key out of range");
  Ctx ctx(BN_CTX_new());
  Point q = new_point();
  if (EC_POINT_mul(curve().group, q.get(), d.get(), nullptr, nullptr, ctx.get()) != 1) {
    throw KeyError("scalar multiplication failed");
  }
  return encode_point(q.get(), ctx.get());
}

bool is_on_curve(const PublicKey& key) {
  Ctx ctx(BN_CTX_new());
  Point p = decode_point(key, ctx.get());
  return p && EC_POINT_is_on_curve(curve().group, p.get(), ctx.get()) == 1 &&
         EC_POINT_is_at_infinity(curve().group, p.get()) == 0;
}

RecoverableSignature sign(const Hash32& digest, const Hash32& secret) {
  const Curve& c = curve();
  Bn d = bn_from(secret);
  if (!in_scalar_range(d.get())) throw KeyError("secret key out of range");
  Ctx ctx(BN_CTX_new());
  Bn z = bn_from(digest);
  BN_nnmod(z.get(), z.get(), c.order, ctx.get());

  Rfc6979 nonces(secret, digest);
  Point big_r = new_point();
  Bn rx = new_bn(), ry = new_bn(), r = new_bn(), s = new_bn(), kinv = new_bn(), tmp = new_bn();
  for (;;) {
    Bn k = bn_from(nonces.next());
    if (!in_scalar_range(k.get())) continue;
    EC_POINT_mul(c.group, big_r.get(), k.get(), nullptr, nullptr, ctx.get());
    EC_POINT_get_affine_coordinates(c.group, big_r.get(), rx.get(), ry.get(), ctx.get());
    BN_nnmod(r.get(), rx.get(), c.order, ctx.get());
    if (BN_is_zero(r.get())) continue;

    BN_mod_inverse(kinv.get(), k.get(), c.order, ctx.get());
    BN_mod_mul(tmp.get(), r.get(), d.get(), c.order, ctx.get());
    BN_mod_add(tmp.get(), tmp.get(), z.get(), c.order, ctx.get());
    BN_mod_mul(s.get(), kinv.get(), tmp.get(), c.order, ctx.get());
    if (BN_is_zero(s.get())) continue;

    std::uint8_t recid = BN_is_odd(ry.get()) ? 1 : 0;
    if (BN_cmp(rx.get(), c.order) >= 0) recid |= 2;
    if (BN_cmp(s.get(), c.half_order) > 0) {
      BN_sub(s.get(), c.order, s.get());
      recid ^= 1;
    }
    return {to_word(r.get()), to_word(s.get()), recid};
  }
}

PublicKey recover(const Hash32& digest, const RecoverableSignature& sig) {
  const Curve& c = curve();
  if (sig.recovery_id > 3) throw SignatureError("invalid recovery id");
  Bn r = bn_from(sig.r), s = bn_from(sig.s);
  if (!in_scalar_range(r.get()) || !in_scalar_range(s.get())) throw SignatureError("r or s out of range");
  if (BN_cmp(s.get(), c.half_order) > 0) throw SignatureError("high-s signature");

  Ctx ctx(BN_CTX_new());
  Bn x = new_bn();
  BN_copy(x.get(), r.get());
  if (sig.recovery_id & 2) BN_add(x.get(), x.get(), c.order);
  if (BN_cmp(x.get(), c.prime) >= 0) throw SignatureError("R.x out of field range");

  Point big_r = new_point();
  if (EC_POINT_set_compressed_coordinates(c.group, big_r.get(), x.get(), sig.recovery_id & 1, ctx.get()) != 1) {
    throw SignatureError("no curve point for r");
  }

  Bn z = bn_from(digest);
  BN_nnmod(z.get(), z.get(), c.order, ctx.get());
  Bn rinv = new_bn(), u1 = new_bn(), u2 = new_bn();
  BN_mod_inverse(rinv.get(), r.get(), c.order, ctx.get());
  BN_mod_mul(u1.get(), z.get(), rinv.get(), c.order, ctx.get());
  BN_mod_sub(u1.get(), c.order, u1.get(), c.order, ctx.get());  // -z/r
  BN_mod_mul(u2.get(), s.get(), rinv.get(), c.order, ctx.get());

  Point q = new_point();
  if (EC_POINT_mul(c.group, q.get(), u1.get(), big_r.get(), u2.get(), ctx.get()) != 1 ||
      EC_POINT_is_at_infinity(c.group, q.get()) == 1) {
    throw SignatureError("recovered point at infinity");
  }
  return encode_point(q.get(), ctx.get());
}

}  // namespace sealbid::secp256k1
