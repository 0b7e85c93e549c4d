"""Bit-accurate I2C master bus-functional model."""

from __future__ import annotations

from covesim.errors import BfmStateError, TestFailure
from covesim.sim import Timer, to_ps

DEFAULT_BIT_PERIOD = to_ps(2.5, "us")  # 400 kHz


class I2cMasterBfm:
    """Drives SCL and SDA open-drain (pull low or release) with writer id ``writer``.

    Coverage, when a database is given, is sampled from the master's view:
    START/STOP/repeated START, read/write transfers, slave ACK/NACK and the
    address and data of every byte moved.
    """

    def __init__(self, sda, scl, *, device_address: int = 0b1010000, bit_period: int = DEFAULT_BIT_PERIOD, coverage=None, writer: str = "master"):
        if bit_period < 4 or bit_period % 4:
            raise ValueError("bit period must be a positive multiple of 4 ps")
        self.sda = sda
        self.scl = scl
        self.device_address = device_address
        self.bit_period = bit_period
        self.coverage = coverage
        self.writer = writer
        self.active = False
        self.bytes_sent = 0
        self._q = Timer(bit_period // 4)
        self._h = Timer(bit_period // 2)

    def _sample(self, **values) -> None:
        if self.coverage is not None:
            self.coverage.sample(values)

    def _level(self, sig):
        v = sig.value
        return None if v.unknown_mask else v._val

    def _require(self, active: bool, what: str) -> None:
        if self.active != active:
            state = "inside a transfer" if self.active else "outside a transfer"
            raise BfmStateError(f"{what} issued {state}")

    def _low(self, sig):
        sig.drive(0, self.writer)

    def _rel(self, sig):
        sig.release(self.writer)

    # bus conditions

    async def start(self) -> None:
        self._require(False, "START")
        sda, scl = self._level(self.sda), self._level(self.scl)
        if sda != 1 or scl != 1:
            raise BfmStateError(f"bus not idle before START: SDA={self.sda.value} SCL={self.scl.value}")
        self._low(self.sda)
        await self._h
        self._low(self.scl)
        await self._q
        self.active = True
        self._sample(c_start=True, c_repeated_start=False)

    async def repeated_start(self) -> None:
        self._require(True, "repeated START")
        self._rel(self.sda)
        await self._q
        self._rel(self.scl)
        await self._q
        self._low(self.sda)
        await self._q
        self._low(self.scl)
        await self._q
        self._sample(c_repeated_start=True)

    async def stop(self) -> None:
        self._require(True, "STOP")
        self._low(self.sda)
        await self._q
        self._rel(self.scl)
        await self._q
        self._rel(self.sda)
        await self._h
        self.active = False
        self._sample(c_stop=True)

    # bits and bytes

    async def _write_bit(self, bit: int) -> None:
        if bit:
            self._rel(self.sda)
        else:
            self._low(self.sda)
        await self._q
        self._rel(self.scl)
        await self._h
        self._low(self.scl)
        await self._q

    async def _read_bit(self):
        self._rel(self.sda)
        await self._q
        self._rel(self.scl)
        await self._q
        bit = self._level(self.sda)
        await self._q
        self._low(self.scl)
        await self._q
        return bit

    async def write_byte(self, byte: int) -> bool:
        """Shift out ``byte`` MSB first; True when the slave ACKs on the ninth clock."""
        self._require(True, "write_byte")
        if not 0 <= byte <= 0xFF:
            raise ValueError(f"not a byte: {byte}")
        for i in range(7, -1, -1):
            await self._write_bit((byte >> i) & 1)
        ack = await self._read_bit() == 0
        self.bytes_sent += 1
        if ack:
            self._sample(c_ack=True)
        else:
            self._sample(c_nack=True)
        return ack

    async def read_byte(self, send_ack: bool) -> int:
        self._require(True, "read_byte")
        value = 0
        for _ in range(8):
            bit = await self._read_bit()
            if bit is None:
                raise TestFailure(f"unknown SDA level while reading: {self.sda.value}")
            value = (value << 1) | bit
        await self._write_bit(0 if send_ack else 1)
        self._rel(self.sda)
        return value

    # memory operations

    async def _address(self, read: bool) -> bool:
        return await self.write_byte((self.device_address << 1) | int(read))

    async def _abort_if(self, acks, check: bool, what: str) -> None:
        if check and not all(acks):
            index = acks.index(False)
            await self.stop()
            raise TestFailure(f"{what}: slave NACKed byte {index} of the transfer")

    async def page_write(self, addr: int, data, *, check: bool = True) -> list[bool]:
        """Write ``data`` from word address ``addr``; returns the ACK of every byte sent."""
        if not 0 <= addr < 32:
            raise ValueError(f"word address {addr} out of range")
        await self.start()
        acks = [await self._address(False)]
        await self._abort_if(acks, check, "write")
        acks.append(await self.write_byte(addr))
        await self._abort_if(acks, check, "write")
        self._sample(c_write=True)
        for i, byte in enumerate(data):
            acks.append(await self.write_byte(byte))
            self._sample(c_mem_data=byte, c_mem_addr=(addr + i) % 32)
            await self._abort_if(acks, check, "write")
        await self.stop()
        return acks

    async def byte_write(self, addr: int, data: int, *, check: bool = True) -> list[bool]:
        return await self.page_write(addr, [data], check=check)

    async def sequential_read(self, addr: int, count: int, *, check: bool = True) -> list[int]:
        """Set the pointer with a dummy write, repeated START, then read ``count`` bytes."""
        if not 0 <= addr < 32:
            raise ValueError(f"word address {addr} out of range")
        if count < 1:
            raise ValueError("read at least one byte")
        await self.start()
        acks = [await self._address(False)]
        await self._abort_if(acks, check, "read")
        acks.append(await self.write_byte(addr))
        await self._abort_if(acks, check, "read")
        await self.repeated_start()
        acks.append(await self._address(True))
        await self._abort_if(acks, check, "read")
        self._sample(c_read=True)
        data = []
        for i in range(count):
            byte = await self.read_byte(send_ack=i < count - 1)
            data.append(byte)
            self._sample(c_mem_data=byte, c_mem_addr=(addr + i) % 32)
        await self.stop()
        return data

    async def random_read(self, addr: int, *, check: bool = True) -> int:
        return (await self.sequential_read(addr, 1, check=check))[0]
