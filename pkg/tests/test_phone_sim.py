import pytest

from phone_sim import (
    ALL_SENSORS, GPS_SENTINEL,
    BtConnect, BtDisconnect, CalendarSet, ClockSet, Device, DisconnectNotConnected, EffectorFailed,
    EffectorState, Fail, GpsFix, HealthState, Location, PhoneError, PhoneSimulator, Restore, Sensor,
    SensorSnapshot, UnknownDevice, Vibration, VolumeOutOfRange,
)


def test_fresh_simulator(phone):
    assert phone.probe_health() == HealthState(True, True, True, True)
    assert phone.effectors == EffectorState(50, Vibration.OFF)
    snapshot = phone.read_sensors()
    assert snapshot.gps == GPS_SENTINEL
    assert snapshot.bluetooth == frozenset()
    assert (snapshot.time, snapshot.meeting_start, snapshot.meeting_end) == (540, 600, 660)


def test_bluetooth_connect_and_disconnect(phone):
    phone.apply_event(BtConnect("car_handsfree"))
    assert "car_handsfree" in phone.read_sensors().bluetooth
    phone.apply_event(BtDisconnect("car_handsfree"))
    assert phone.read_sensors().bt_count == 0


def test_disconnect_requires_connection(phone):
    with pytest.raises(DisconnectNotConnected):
        phone.apply_event(BtDisconnect("home_pc"))


def test_failed_gps_reads_as_sentinel(phone):
    phone.apply_event(GpsFix(True, Location.OTHER, 80, 51.0, -0.1))
    phone.apply_event(Fail(Device.GPS))

    gps = phone.read_sensors().gps
    assert gps.valid is False
    assert (gps.lat, gps.lon) == (0.0, 0.0)
    assert gps.location == Location.UNKNOWN
    assert gps.speed == 0


def test_restored_gps_reports_fixes_again(phone):
    phone.apply_event(Fail("gps"))
    phone.apply_event(GpsFix(True, Location.HOME, 0, 48.1, 11.5))
    assert phone.read_sensors().gps == GPS_SENTINEL

    phone.apply_event(Restore("gps"))
    gps = phone.read_sensors().gps
    assert gps.valid and gps.location == Location.HOME
    assert (gps.lat, gps.lon) == (48.1, 11.5)


def test_failed_bluetooth_reads_empty(phone):
    phone.apply_event(BtConnect("office_pc"))
    phone.apply_event(Fail(Device.BLUETOOTH))
    assert phone.read_sensors().bluetooth == frozenset()
    phone.apply_event(Restore(Device.BLUETOOTH))
    assert phone.read_sensors().bluetooth == {"office_pc"}


def test_unknown_device(phone):
    with pytest.raises(UnknownDevice):
        phone.apply_event(Fail("backlight"))


def test_clock_and_calendar(phone):
    phone.apply_event(ClockSet(615))
    phone.apply_event(CalendarSet(610, 700))
    snapshot = phone.read_sensors()
    assert (snapshot.time, snapshot.meeting_start, snapshot.meeting_end) == (615, 610, 700)


def test_clock_out_of_range(phone):
    with pytest.raises(ValueError):
        phone.apply_event(ClockSet(1440))


def test_masked_read_leaves_gps_untouched(phone):
    phone.apply_event(GpsFix(True, Location.OTHER, 30, 1.0, 2.0))
    snapshot = phone.read_sensors({Sensor.BLUETOOTH, Sensor.CALENDAR})

    assert snapshot.gps == GPS_SENTINEL
    assert phone.access_count(Sensor.GPS) == 0
    assert phone.access_count(Sensor.BLUETOOTH) == 1
    assert phone.access_count(Sensor.CALENDAR) == 1


def test_empty_mask_reads_only_sentinels(phone):
    phone.apply_event(BtConnect("home_pc"))
    snapshot = phone.read_sensors(set())
    assert snapshot == SensorSnapshot()
    assert sum(phone.access_counts().values()) == 0


def test_full_read_counts_every_sensor(phone):
    phone.read_sensors(ALL_SENSORS)
    assert phone.access_counts() == {Sensor.GPS: 1, Sensor.BLUETOOTH: 1, Sensor.CALENDAR: 1}


def test_set_volume_and_vibration(phone):
    phone.set_volume(75, caller="AdaptationManagerAllEffectors")
    phone.set_vibration("ON")
    assert phone.effectors == EffectorState(75, Vibration.ON)
    assert [c.accepted for c in phone.effector_calls] == [True, True]
    assert phone.effector_calls[0].caller == "AdaptationManagerAllEffectors"


def test_failed_ringtone_rejects_volume(phone):
    phone.apply_event(Fail(Device.RINGTONE))
    with pytest.raises(EffectorFailed) as info:
        phone.set_volume(0)

    assert info.value.effector == Device.RINGTONE
    assert isinstance(info.value, PhoneError)
    assert phone.effectors.volume == 50
    assert phone.effector_calls[-1].accepted is False


def test_failed_vibration_rejects_setting(phone):
    phone.apply_event(Fail(Device.VIBRATION))
    with pytest.raises(EffectorFailed):
        phone.set_vibration(Vibration.ON)
    assert phone.effectors.vibration == Vibration.OFF


@pytest.mark.parametrize("volume", [-1, 101])
def test_volume_out_of_range(phone, volume):
    with pytest.raises(VolumeOutOfRange):
        phone.set_volume(volume)
    assert phone.effector_calls == []


def test_probe_health_tracks_fail_and_restore(phone):
    phone.apply_event(Fail(Device.GPS))
    assert phone.probe_health().gps_ok is False
    assert phone.probe_health() == phone.probe_health()
    phone.apply_event(Restore(Device.GPS))
    assert phone.probe_health().gps_ok is True


def test_repeated_fail_has_no_effect(phone):
    phone.apply_event(Fail(Device.VIBRATION))
    phone.apply_event(Fail(Device.VIBRATION))
    assert phone.probe_health() == HealthState(vibration_ok=False)


def test_health_state_helpers():
    health = HealthState().with_device(Device.BLUETOOTH, False)
    assert not health.is_ok(Device.BLUETOOTH)
    assert health.changed_devices(HealthState()) == [Device.BLUETOOTH]
    assert Device.GPS.is_sensor and not Device.RINGTONE.is_sensor


@pytest.mark.parametrize("speed,lat,lon", [
    (float("nan"), 1.0, 2.0),
    (40.0, float("inf"), 2.0),
    (40.0, 1.0, float("-inf")),
])
def test_non_finite_gps_fix_is_rejected(phone, speed, lat, lon):
    with pytest.raises(ValueError):
        phone.apply_event(GpsFix(True, Location.OTHER, speed, lat, lon))
    assert phone.read_sensors().gps == GPS_SENTINEL
