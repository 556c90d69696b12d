// Copyright 2026 The vcsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <set>
#include <string>

#include "gtest/gtest.h"
#include "vcsim/core/tenant.h"
#include "vcsim/core/types.h"

namespace vcsim {
namespace {

constexpr char kZeroUid[] = "00000000-0000-0000-0000-000000000000";

TenantRecord MustRecord(const std::string& id, Uid uid,
                        const std::string& credential) {
  auto r = MakeTenantRecord(id, uid, credential, 1, nullptr);
  EXPECT_TRUE(r.ok()) << r.status();
  return *r;
}

// Reference values computed with an independent FNV-1a implementation.
TEST(Fnv1aTest, MatchesReferenceDigests) {
  EXPECT_EQ(Fnv1a32(""), 0x811c9dc5u);
  EXPECT_EQ(Fnv1a32("a"), 0xe40c292cu);
  EXPECT_EQ(Fnv1a32("foobar"), 0xbf9cf968u);
  EXPECT_EQ(Fnv1a32(kZeroUid), 0xbe478ed1u);
  EXPECT_EQ(Fnv1a32("0123456789abcdef0123456789abcdef"), 0x86d04db5u);
}

TEST(UidTest, TextRoundTripAndZeroForm) {
  EXPECT_EQ(Uid().ToString(), kZeroUid);
  Uid u(0x0123456789abcdefULL, 0xfedcba9876543210ULL);
  EXPECT_EQ(u.ToString(), "01234567-89ab-cdef-fedc-ba9876543210");
  auto parsed = Uid::Parse(u.ToString());
  ASSERT_TRUE(parsed.ok());
  EXPECT_EQ(*parsed, u);
  EXPECT_FALSE(Uid::Parse("not-a-uid").ok());
  EXPECT_FALSE(Uid::Parse("01234567-89AB-cdef-fedc-ba9876543210").ok());
}

TEST(FingerprintTest, Sha256OfKnownInput) {
  EXPECT_EQ(FingerprintHex(FingerprintOf("abc")),
            "ba7816bf8f01cfea414140de5dae2223"
            "b00361a396177a9cb410ff61f20015ad");
}

TEST(DnsLabelTest, BasicRules) {
  EXPECT_TRUE(IsDnsLabel("default"));
  EXPECT_TRUE(IsDnsLabel("a-1"));
  EXPECT_FALSE(IsDnsLabel(""));
  EXPECT_FALSE(IsDnsLabel("-a"));
  EXPECT_FALSE(IsDnsLabel("a-"));
  EXPECT_FALSE(IsDnsLabel("A"));
  EXPECT_FALSE(IsDnsLabel("a_b"));
  EXPECT_FALSE(IsDnsLabel(std::string(64, 'a')));
  EXPECT_TRUE(IsDnsLabel(std::string(63, 'a')));
}

TEST(ObjectKeyTest, ValidationFollowsScope) {
  EXPECT_TRUE(ValidateKey({Kind::kPod, "default", "p"}).ok());
  EXPECT_FALSE(ValidateKey({Kind::kPod, "", "p"}).ok());
  EXPECT_FALSE(ValidateKey({Kind::kPod, "default", ""}).ok());
  EXPECT_TRUE(ValidateKey({Kind::kNode, "", "n1"}).ok());
  EXPECT_FALSE(ValidateKey({Kind::kNamespace, "x", "n1"}).ok());
  EXPECT_EQ((ObjectKey{Kind::kPod, "default", "p"}).ToString(),
            "Pod/default/p");
}

TEST(MangleTest, ZeroUidOracle) {
  TenantRecord t = MustRecord("vc-a", Uid(), "cred-a");
  EXPECT_EQ(ShortUidHash(Uid()), "be478e");
  EXPECT_EQ(t.prefix, "vc-a-be478e-");
  auto m = MangleNamespace(t, "default");
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(*m, "vc-a-be478e-default");
  // Deterministic and injective in the namespace.
  EXPECT_EQ(*MangleNamespace(t, "default"), *m);
  EXPECT_NE(*MangleNamespace(t, "kube-system"), *m);
}

TEST(MangleTest, RejectsInvalidNamespace) {
  TenantRecord t = MustRecord("vc-a", Uid(), "cred-a");
  EXPECT_EQ(MangleNamespace(t, "Bad_NS").status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(MangleNamespace(t, "").status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(RegistryTest, DemangleInvertsMangle) {
  TenantRegistry reg;
  ASSERT_TRUE(reg.Register(MustRecord("vc-a", Uid(), "cred-a")).ok());
  auto m = reg.Mangle("vc-a", "default");
  ASSERT_TRUE(m.ok());
  auto d = reg.Demangle(*m);
  ASSERT_TRUE(d.ok());
  EXPECT_EQ(d->first, "vc-a");
  EXPECT_EQ(d->second, "default");
}

TEST(RegistryTest, UnprefixedNamespaceIsNotFound) {
  TenantRegistry reg;
  EXPECT_EQ(reg.Demangle("unprefixed-ns").status().code(),
            absl::StatusCode::kNotFound);
  ASSERT_TRUE(reg.Register(MustRecord("vc-a", Uid(), "cred-a")).ok());
  EXPECT_EQ(reg.Demangle("unprefixed-ns").status().code(),
            absl::StatusCode::kNotFound);
  EXPECT_EQ(reg.Demangle("vc-a-be478e-").status().code(),
            absl::StatusCode::kNotFound);
}

TEST(RegistryTest, RejectsDuplicates) {
  TenantRegistry reg;
  ASSERT_TRUE(reg.Register(MustRecord("vc-a", Uid(), "cred-a")).ok());
  EXPECT_EQ(reg.Register(MustRecord("vc-a", Uid(1, 1), "cred-x")).code(),
            absl::StatusCode::kAlreadyExists);
  // Same fingerprint under another id.
  EXPECT_EQ(reg.Register(MustRecord("vc-b", Uid(1, 2), "cred-a")).code(),
            absl::StatusCode::kAlreadyExists);
  ASSERT_TRUE(reg.Unregister("vc-a").ok());
  EXPECT_TRUE(reg.Register(MustRecord("vc-a", Uid(1, 1), "cred-x")).ok());
  EXPECT_EQ(reg.Unregister("nope").code(), absl::StatusCode::kNotFound);
}

TEST(RegistryTest, RejectsPrefixCollision) {
  TenantRegistry reg;
  TenantRecord a = MustRecord("vc-a", Uid(), "cred-a");
  ASSERT_TRUE(reg.Register(a).ok());
  TenantRecord clash = MustRecord("vc-b", Uid(5, 5), "cred-b");
  clash.prefix = a.prefix;
  EXPECT_EQ(reg.Register(clash).code(), absl::StatusCode::kAlreadyExists);
}

TEST(RegistryTest, TenThousandPairsRoundTripWithoutCollision) {
  std::mt19937_64 rng(7);
  TenantRegistry reg;
  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) {
    std::string id = "tenant-" + std::to_string(i);
    ASSERT_TRUE(reg.Register(MustRecord(id, Uid(rng(), rng()),
                                        "cred-" + id)).ok());
    ids.push_back(id);
  }
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-";
  std::set<std::string> mangled;
  std::set<std::pair<std::string, std::string>> inputs;
  while (inputs.size() < 10000) {
    const std::string& id = ids[rng() % ids.size()];
    int len = 1 + static_cast<int>(rng() % 20);
    std::string ns;
    for (int k = 0; k < len; ++k) {
      // Letters only at the ends keep the name a DNS label.
      bool edge = k == 0 || k == len - 1;
      ns += alphabet[rng() % (edge ? 26 : alphabet.size())];
    }
    if (!inputs.insert({id, ns}).second) continue;
    auto m = reg.Mangle(id, ns);
    ASSERT_TRUE(m.ok()) << ns;
    mangled.insert(*m);
    auto d = reg.Demangle(*m);
    ASSERT_TRUE(d.ok()) << *m;
    EXPECT_EQ(d->first, id);
    EXPECT_EQ(d->second, ns);
  }
  EXPECT_EQ(mangled.size(), inputs.size());
}

TEST(RegistryTest, CredentialResolution) {
  TenantRegistry reg;
  Fingerprint stranger = FingerprintOf("nobody");
  EXPECT_EQ(reg.ResolveByCredential(stranger).status().code(),
            absl::StatusCode::kUnauthenticated);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    std::string id = "t-" + std::to_string(i);
    ASSERT_TRUE(
        reg.Register(MustRecord(id, Uid(rng(), rng()), "secret-" + id)).ok());
  }
  for (int i = 0; i < 100; ++i) {
    std::string id = "t-" + std::to_string(i);
    auto r = reg.ResolveByCredential(FingerprintOf("secret-" + id));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r->tenant_id, id);
  }
  EXPECT_EQ(reg.ResolveByCredential(stranger).status().code(),
            absl::StatusCode::kUnauthenticated);
}

TEST(ObjectTest, PayloadMustMatchKind) {
  VersionedObject obj;
  obj.key = {Kind::kPod, "default", "p"};
  obj.spec = DefaultSpec(Kind::kPod);
  obj.status = DefaultStatus(Kind::kPod);
  EXPECT_TRUE(ValidateObject(obj).ok());
  obj.spec = ServiceSpec{};
  EXPECT_FALSE(ValidateObject(obj).ok());
}

}  // namespace
}  // namespace vcsim
