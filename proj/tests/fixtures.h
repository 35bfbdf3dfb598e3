// Copyright 2026 The insitu Authors
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

#pragma once

// Captured top and iotop batch output used as golden parser input.

namespace insitu::testing {

inline constexpr const char* kTopBlock =
    "top - 23:43:41 up 1:42, 1 user, load average: 1.20, 0.67, 0.46\n"
    "Tasks: 268 total, 2 running, 214 sleeping, 0 stopped, 1 zombie\n"
    "%cpu(s): 21.8 us, 2.9 sy, 0.0 ni, 59.6 id, 13.7 wa, 0.0 hi, 2.0 si, 0.0 st\n"
    "KiB Mem : 16257856 total, 3572580 free, 2052448 used, 10632828 buff/cache\n"
    "KiB Swap: 2097148 total, 2097148 free, 0 used, 13510608 avail Mem\n"
    "\n"
    "  PID USER      PR  NI   VIRT   RES   SHR  S  %CPU  %MEM    TIME+  COMMAND\n"
    " 3553  om        20   0  174716 45092 43396  R   82.4   0.3   0:33.39 postgres\n"
    " 2438  om        20   0  2291336 215472 45972  S    8.3   1.3  14:12.69 anydesk\n"
    " 1068  om        20   0  595520 110000 94380  S   2.7   0.7   3:44.15 Xorg\n"
    " 3544  root      20   0  52952 14676  6716  S   2.3   0.1   0:00.88 iotop\n"
    " 3542  om        20   0  44672  4544  3316  S   2.0   0.0   0:00.88 top\n";

inline constexpr const char* kIotopBlock =
    "Total DISK READ : 40501.48 K/s | Total DISK WRITE : 22058.46 K/s\n"
    "Actual DISK READ: 20452.48 K/s | Actual DISK WRITE: 9988.81 K/s\n"
    "  TID  PRIO  USER      DISK READ  DISK WRITE  SWAPIN     IO>     COMMAND\n"
    "20134 be/4 root      391528.00 K  308.00 K  0.00 %  1.07 % mount.ntfs /dev\n"
    " 238  be/3 root           0.00 K  4260.00 K  0.00 %  0.88 % [jbd2/sda3-8]\n"
    "16244 be/4 om           0.00 K 165280.00 K  0.00 %  0.77 % postgres: wal w\n"
    "20396 be/4 om      328704.00 K 203120.00 K  0.00 %  16.04 % postgres: om pl\n"
    " 1261 be/4 om          432.00 K   0.00 K  0.00 %  0.12 % Xorg vt1 -displ\n"
    "27706 be/4 om          4848.00 K  1644.00 K  0.00 %  0.10 % chrome\n";

}  // namespace insitu::testing
